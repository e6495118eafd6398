#include "tilebal/generator.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <queue>
#include <stdexcept>
#include <string>

namespace tilebal {

namespace {

constexpr int kDr[4] = {-1, 0, 1, 0};
constexpr int kDc[4] = {0, 1, 0, -1};

constexpr std::array<TileKind, 4> kTerrainKinds = {
    TileKind::Grass, TileKind::Forest, TileKind::Stone, TileKind::Water};

/// All passable cells reachable from `start`, as a cell-index mask.
std::vector<char> passable_component(const Level& level, Position start) {
  std::vector<char> seen(static_cast<size_t>(level.cell_count()), 0);
  if (!passable(level.at(start))) return seen;
  std::queue<Position> frontier;
  seen[static_cast<size_t>(level.index(start))] = 1;
  frontier.push(start);
  while (!frontier.empty()) {
    const Position p = frontier.front();
    frontier.pop();
    for (int d = 0; d < 4; ++d) {
      const Position q{p.row + kDr[d], p.col + kDc[d]};
      if (!level.in_bounds(q) || !passable(level.at(q))) continue;
      char& mark = seen[static_cast<size_t>(level.index(q))];
      if (mark) continue;
      mark = 1;
      frontier.push(q);
    }
  }
  return seen;
}

/// Turns impassable cells along a shortest corridor between the components of
/// the two spawns into Grass. BFS runs over all cells (walls included) from
/// the whole source component; randomized neighbor order randomizes which of
/// the equally short corridors gets carved.
void carve_corridor(Level& level, Position from, Position to, Rng& rng) {
  const auto source = passable_component(level, from);
  const auto target = passable_component(level, to);
  std::vector<int> parent(static_cast<size_t>(level.cell_count()), -1);
  std::vector<char> seen(static_cast<size_t>(level.cell_count()), 0);
  std::queue<Position> frontier;
  for (int row = 0; row < level.height(); ++row) {
    for (int col = 0; col < level.width(); ++col) {
      const Position p{row, col};
      if (!source[static_cast<size_t>(level.index(p))]) continue;
      seen[static_cast<size_t>(level.index(p))] = 1;
      frontier.push(p);
    }
  }
  int hit = -1;
  while (!frontier.empty() && hit < 0) {
    const Position p = frontier.front();
    frontier.pop();
    std::array<int, 4> order = {0, 1, 2, 3};
    for (int i = 3; i > 0; --i) std::swap(order[i], order[rng.uniform_int(i + 1)]);
    for (const int d : order) {
      const Position q{p.row + kDr[d], p.col + kDc[d]};
      if (!level.in_bounds(q)) continue;
      const int qi = level.index(q);
      if (seen[static_cast<size_t>(qi)]) continue;
      seen[static_cast<size_t>(qi)] = 1;
      parent[static_cast<size_t>(qi)] = level.index(p);
      if (target[static_cast<size_t>(qi)]) {
        hit = qi;
        break;
      }
      frontier.push(q);
    }
  }
  if (hit < 0) throw std::logic_error("corridor search failed on a bounded grid");
  for (int i = hit; i >= 0; i = parent[static_cast<size_t>(i)]) {
    const Position p{i / level.width(), i % level.width()};
    if (!passable(level.at(p))) level.at(p) = TileKind::Grass;
  }
}

}  // namespace

void validate_gen_config(const GenConfig& cfg) {
  if (cfg.width < 2 || cfg.height < 2) {
    throw std::invalid_argument("generator grid must be at least 2x2");
  }
  const double weights[] = {cfg.weight_grass, cfg.weight_forest, cfg.weight_stone,
                            cfg.weight_water};
  for (const double w : weights) {
    if (!(w > 0.0)) throw std::invalid_argument("tile weights must be positive");
  }
  if (cfg.num_players != 2) {
    throw std::invalid_argument("generator supports exactly two players");
  }
  if (cfg.max_repair_attempts < 1) {
    throw std::invalid_argument("max_repair_attempts must be >= 1");
  }
}

ValidityReport validate(const Level& level) {
  ValidityReport report;
  const auto spawns = level.find_all(TileKind::PlayerSpawn);
  report.player_count_ok = spawns.size() == 2;
  report.connected_ok =
      report.player_count_ok && path_exists(level, spawns[0], spawns[1]);
  return report;
}

Level sample_terrain(const GenConfig& cfg, Rng& rng) {
  const double weights[] = {cfg.weight_grass, cfg.weight_forest, cfg.weight_stone,
                            cfg.weight_water};
  const double total = weights[0] + weights[1] + weights[2] + weights[3];
  std::vector<TileKind> cells(static_cast<size_t>(cfg.width) * cfg.height);
  for (auto& cell : cells) {
    double u = rng.next_double() * total;
    cell = kTerrainKinds.back();
    for (size_t k = 0; k < kTerrainKinds.size(); ++k) {
      u -= weights[k];
      if (u < 0.0) {
        cell = kTerrainKinds[k];
        break;
      }
    }
  }
  return Level(cfg.width, cfg.height, std::move(cells));
}

Level generate(const GenConfig& cfg) {
  validate_gen_config(cfg);
  Rng rng(cfg.seed);
  for (int attempt = 0; attempt < cfg.max_repair_attempts; ++attempt) {
    Level level = sample_terrain(cfg, rng);
    std::vector<Position> open;
    for (int row = 0; row < level.height(); ++row) {
      for (int col = 0; col < level.width(); ++col) {
        if (passable(level.at({row, col}))) open.push_back({row, col});
      }
    }
    if (open.size() < 2) continue;  // all rock and water; resample
    const int first = rng.uniform_int(static_cast<int>(open.size()));
    int second = rng.uniform_int(static_cast<int>(open.size()) - 1);
    if (second >= first) ++second;
    const Position a = open[static_cast<size_t>(first)];
    const Position b = open[static_cast<size_t>(second)];
    level.at(a) = TileKind::PlayerSpawn;
    level.at(b) = TileKind::PlayerSpawn;
    if (!path_exists(level, a, b)) carve_corridor(level, a, b, rng);
    return level;
  }
  throw std::runtime_error("level generation failed: no passable cells after " +
                           std::to_string(cfg.max_repair_attempts) + " attempts");
}

int player_count(const Level& level) {
  return static_cast<int>(level.find_all(TileKind::PlayerSpawn).size());
}

double generator_reward(const Level& prev, const Level& next, int target_players) {
  if (prev == next) return 0.0;
  const int count_term = std::abs(target_players - player_count(prev)) -
                         std::abs(target_players - player_count(next));
  const ValidityReport report = validate(next);
  double path_term = 0.0;
  if (report.player_count_ok) path_term = report.connected_ok ? 1.0 : -1.0;
  return count_term + path_term;
}

GeneratorEnv::GeneratorEnv(GenEnvConfig cfg) : cfg_(cfg) {
  validate_gen_config(cfg_.gen);
  if (cfg_.max_steps < 1 || cfg_.max_changes < 1) {
    throw std::invalid_argument("generator env caps must be >= 1");
  }
  level_ = Level::filled(cfg_.gen.width, cfg_.gen.height, TileKind::Grass);
}

std::vector<int> GeneratorEnv::action_sizes() const {
  return {cfg_.gen.height, cfg_.gen.width, static_cast<int>(kLevelTileKinds.size())};
}

int GeneratorEnv::obs_len() const {
  return static_cast<int>(kLevelTileKinds.size()) * cfg_.gen.width * cfg_.gen.height;
}

Observation GeneratorEnv::reset(std::uint64_t seed) {
  Rng rng(seed);
  return reset_with(sample_terrain(cfg_.gen, rng));
}

Observation GeneratorEnv::reset_with(const Level& level) {
  if (level.width() != cfg_.gen.width || level.height() != cfg_.gen.height) {
    throw std::invalid_argument("level does not match configured grid size");
  }
  level_ = level;
  steps_ = 0;
  changes_ = 0;
  done_ = false;
  termination_ = GenTermination::StepCap;
  check_done();  // a level handed in already valid ends immediately
  return encode_tile_planes(level_);
}

GeneratorEnv::Step GeneratorEnv::step(const std::vector<int>& action) {
  if (done_) throw std::logic_error("step called on a finished episode");
  if (action.size() != 3) throw std::out_of_range("generator action needs 3 components");
  const auto sizes = action_sizes();
  for (size_t i = 0; i < action.size(); ++i) {
    if (action[i] < 0 || action[i] >= sizes[i]) {
      throw std::out_of_range("generator action component out of range");
    }
  }
  const Position target{action[0], action[1]};
  const TileKind kind = kLevelTileKinds[static_cast<size_t>(action[2])];

  Step out;
  if (level_.at(target) != kind) {
    const Level prev = level_;
    level_.at(target) = kind;
    ++changes_;
    out.changed = true;
    out.reward = generator_reward(prev, level_, cfg_.gen.num_players);
  }
  ++steps_;
  check_done();
  out.obs = encode_tile_planes(level_);
  out.done = done_;
  return out;
}

void GeneratorEnv::check_done() {
  if (validate(level_).valid()) {
    done_ = true;
    termination_ = GenTermination::Solved;
  } else if (changes_ >= cfg_.max_changes) {
    done_ = true;
    termination_ = GenTermination::ChangeCap;
  } else if (steps_ >= cfg_.max_steps) {
    done_ = true;
    termination_ = GenTermination::StepCap;
  }
}

}  // namespace tilebal
