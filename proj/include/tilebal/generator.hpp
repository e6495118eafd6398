#pragma once

#include <cstdint>
#include <vector>

#include "tilebal/level.hpp"
#include "tilebal/obs.hpp"
#include "tilebal/rng.hpp"

// Level generation. The default generator samples terrain from configured
// tile weights, drops two player spawns on passable cells and, if they end up
// separated, carves a grass corridor between them, so every produced level is
// playable by construction: exactly two spawns with a passable path between
// them. A wide-representation generator MDP (place one tile per step, reward
// for approaching validity) is also provided for policy training experiments.

namespace tilebal {

struct GenConfig {
  int width = 6;
  int height = 6;
  // Sampling weights of the four terrain kinds, normalized internally.
  double weight_grass = 0.5;
  double weight_forest = 0.2;
  double weight_stone = 0.15;
  double weight_water = 0.15;
  int num_players = 2;  // fixed; anything else is a config error
  int max_repair_attempts = 100;
  std::uint64_t seed = 0;
};

void validate_gen_config(const GenConfig& cfg);

struct ValidityReport {
  bool player_count_ok = false;
  bool connected_ok = false;

  bool valid() const { return player_count_ok && connected_ok; }
};

/// player_count_ok iff the level has exactly two spawns; connected_ok iff it
/// has exactly two and they are connected.
ValidityReport validate(const Level& level);

/// Terrain-only sample from the configured weights (no spawns). Exposed so
/// the pre-repair tile distribution can be measured directly.
Level sample_terrain(const GenConfig& cfg, Rng& rng);

/// Generates a valid level; deterministic in cfg.seed.
Level generate(const GenConfig& cfg);

int player_count(const Level& level);

/// Shaping reward for a generator step from `prev` to `next`: the improvement
/// in player-count distance to the target, plus a path term on the result
/// (+1 for two connected spawns, -1 for two disconnected ones). An unchanged
/// level is a no-op and scores 0.
double generator_reward(const Level& prev, const Level& next, int target_players = 2);

struct GenEnvConfig {
  GenConfig gen;
  int max_steps = 100;
  int max_changes = 36;
};

enum class GenTermination { Solved, StepCap, ChangeCap };

/// Wide-representation generator MDP: the action [row, col, kind-index]
/// overwrites one cell with one of the five authored kinds. Episodes end when
/// the level becomes valid or a cap is hit. Observations are the 5-plane
/// one-hot encoding from obs.hpp.
class GeneratorEnv {
 public:
  explicit GeneratorEnv(GenEnvConfig cfg);

  /// Component sizes of the action: [height, width, 5].
  std::vector<int> action_sizes() const;
  int obs_len() const;

  /// Starts from freshly sampled terrain noise (no spawns).
  Observation reset(std::uint64_t seed);

  /// Starts from a given level (tests and curricula).
  Observation reset_with(const Level& level);

  struct Step {
    Observation obs;
    double reward = 0.0;
    bool done = false;
    bool changed = false;
  };

  Step step(const std::vector<int>& action);

  const Level& level() const { return level_; }
  bool done() const { return done_; }
  int steps() const { return steps_; }
  int changes() const { return changes_; }
  GenTermination termination() const { return termination_; }

 private:
  void check_done();

  GenEnvConfig cfg_;
  Level level_;
  int steps_ = 0;
  int changes_ = 0;
  bool done_ = true;
  GenTermination termination_ = GenTermination::StepCap;
};

}  // namespace tilebal
