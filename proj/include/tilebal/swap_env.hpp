#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "tilebal/balance.hpp"
#include "tilebal/generator.hpp"
#include "tilebal/level.hpp"
#include "tilebal/obs.hpp"
#include "tilebal/rng.hpp"

// The balancing MDP: an episode starts from a valid level, each step may swap
// the contents of two cells, and the reward tracks how the balancing state b
// moves. Three action representations share the machinery and differ only in
// how the two cells are addressed:
//
//   narrow  A=[2]          swap-or-skip at two randomly presented cursors,
//                          cursors resampled every step
//   turtle  A=[4,4,2]      swap at the two agent-steered cursors, or move
//                          each cursor one tile (N/E/S/W, clamped at borders)
//   wide    A=[w,h,w,h,2]  swap two freely addressed cells
//
// A swap only executes when the two kinds differ and the swapped level is
// still valid (two connected spawns); everything else is a no-op worth 0
// reward and no simulation call. Episodes end when b hits 0.5 exactly (up to
// the configured tolerance), or a step or change cap is exceeded.

namespace tilebal {

enum class Representation { SwapNarrow, SwapTurtle, SwapWide };

const char* representation_name(Representation repr);
std::optional<Representation> representation_from_name(std::string_view name);

struct ActionSpace {
  std::vector<int> sizes;  // per-component cardinalities
  long total = 0;          // product of sizes
};

ActionSpace action_space(Representation repr, int width, int height);

struct EnvConfig {
  Representation repr = Representation::SwapNarrow;
  int max_steps = 60;
  int max_changes = 8;
  int n_sims = 14;  // simulations per balance estimate, from calibrate_n
  int workers = 1;
  SimConfig sim;
  RewardConfig reward;
};

void validate_env_config(const EnvConfig& cfg);

enum class SwapTermination { Running, Balanced, ChangeCap, StepCap };

const char* termination_name(SwapTermination t);

/// Observation layout: 5 one-hot tile planes (kLevelTileKinds order), each
/// height x width row-major, then for narrow/turtle one one-hot plane per
/// cursor. Wide carries no cursor planes.
Observation encode_obs(const Level& level, Representation repr,
                       const std::array<Position, 2>& cursors);

class SwapEnv {
 public:
  SwapEnv(EnvConfig cfg, int width, int height);

  std::vector<int> action_sizes() const;
  int obs_len() const;

  /// Starts an episode on a copy of `level` (must be valid and match the
  /// configured grid size). Every balance estimate in the episode replays the
  /// same match seeds, derive_seed(seed, 0), so reward contrasts use common
  /// random numbers; cursor randomness comes from derive_seed(seed, 1). A
  /// level that is already balanced produces a finished zero-length episode.
  Observation reset(const Level& level, std::uint64_t seed);

  struct Step {
    Observation obs;
    double reward = 0.0;
    bool done = false;
    bool executed = false;                // swap applied and simulated
    std::array<Position, 2> cells{};      // the two addressed cells
    std::array<TileKind, 2> swapped{};    // their kinds when executed
  };

  Step step(const std::vector<int>& action);

  const Level& level() const { return level_; }
  double b() const { return b_; }
  double b0() const { return b0_; }
  int steps() const { return steps_; }
  int changes() const { return changes_; }
  bool done() const { return done_; }
  /// Total estimate_balance calls this episode (reset counts one).
  int estimate_calls() const { return estimate_calls_; }
  const std::array<Position, 2>& cursors() const { return cursors_; }
  SwapTermination termination() const { return termination_; }
  const EnvConfig& config() const { return cfg_; }

 private:
  void sample_cursors();
  void attempt_swap(Position a, Position b, Step& out);
  void check_done();

  EnvConfig cfg_;
  int width_ = 0;
  int height_ = 0;
  Level level_;
  std::array<Position, 2> cursors_{};
  Rng cursor_rng_{0};
  std::uint64_t sim_base_ = 0;
  double b0_ = 0.0;
  double b_ = 0.0;
  int steps_ = 0;
  int changes_ = 0;
  int estimate_calls_ = 0;
  bool done_ = true;
  SwapTermination termination_ = SwapTermination::Running;
};

/// Endless supply of generated valid levels; level k is deterministic in
/// (gen, seed, k).
class LevelStream {
 public:
  LevelStream(GenConfig gen, std::uint64_t seed);

  Level next();
  std::uint64_t produced() const { return count_; }

 private:
  GenConfig gen_;
  std::uint64_t seed_;
  std::uint64_t count_ = 0;
};

/// Rollout adapter: every reset pulls fresh levels from a supplier until one
/// is unbalanced (already-balanced levels end at reset and teach nothing).
class TrainingEnv {
 public:
  using LevelSupplier = std::function<Level()>;

  /// Streams freshly generated levels.
  TrainingEnv(EnvConfig cfg, GenConfig gen, std::uint64_t seed);

  /// Draws levels from a custom source (e.g. cycling a fixed dataset).
  TrainingEnv(EnvConfig cfg, int width, int height, LevelSupplier supplier,
              std::uint64_t seed);

  std::vector<int> action_sizes() const { return env_.action_sizes(); }
  int obs_len() const { return env_.obs_len(); }

  Observation reset();

  struct Step {
    Observation obs;
    double reward = 0.0;
    bool done = false;
  };

  Step step(const std::vector<int>& action);

  SwapEnv& env() { return env_; }
  const SwapEnv& env() const { return env_; }
  int episodes() const { return episodes_; }
  int skipped() const { return skipped_; }

 private:
  SwapEnv env_;
  LevelSupplier supply_;
  std::uint64_t seed_;
  std::uint64_t resets_ = 0;  // seeds one env episode per attempted level
  int episodes_ = 0;
  int skipped_ = 0;
};

}  // namespace tilebal
