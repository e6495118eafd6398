#pragma once

#include <Eigen/Core>

#include "tilebal/level.hpp"

namespace tilebal {

/// Flat one-hot observation vector fed to policies.
using Observation = Eigen::VectorXd;

/// Tile kinds that appear in authored levels. Scrub exists only inside a
/// running match, so observations carry five planes, not six.
inline constexpr std::array<TileKind, 5> kLevelTileKinds = {
    TileKind::Grass, TileKind::Forest, TileKind::Stone, TileKind::Water,
    TileKind::PlayerSpawn};

/// Plane index of a kind in kLevelTileKinds order; throws for scrub.
int obs_plane_index(TileKind kind);

/// Five one-hot planes, each height x width row-major, concatenated in
/// kLevelTileKinds order. Every cell contributes exactly one 1.
Observation encode_tile_planes(const Level& level);

}  // namespace tilebal
