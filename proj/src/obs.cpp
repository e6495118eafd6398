#include "tilebal/obs.hpp"

namespace tilebal {

int obs_plane_index(TileKind kind) {
  for (size_t i = 0; i < kLevelTileKinds.size(); ++i) {
    if (kLevelTileKinds[i] == kind) return static_cast<int>(i);
  }
  throw std::invalid_argument(std::string("tile kind '") + tile_name(kind) +
                              "' has no observation plane");
}

Observation encode_tile_planes(const Level& level) {
  const int cells = level.cell_count();
  Observation obs = Observation::Zero(static_cast<Eigen::Index>(kLevelTileKinds.size()) * cells);
  for (int i = 0; i < cells; ++i) {
    const TileKind kind = level.cells()[static_cast<size_t>(i)];
    obs[static_cast<Eigen::Index>(obs_plane_index(kind)) * cells + i] = 1.0;
  }
  return obs;
}

}  // namespace tilebal
