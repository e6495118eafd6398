#include "tilebal/swap_env.hpp"

#include <memory>
#include <stdexcept>

namespace tilebal {

namespace {

// Cursor movement deltas, same N/E/S/W order as the simulator's Move enum.
constexpr int kDr[4] = {-1, 0, 1, 0};
constexpr int kDc[4] = {0, 1, 0, -1};

int clamp(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

}  // namespace

const char* representation_name(Representation repr) {
  switch (repr) {
    case Representation::SwapNarrow: return "swap-narrow";
    case Representation::SwapTurtle: return "swap-turtle";
    case Representation::SwapWide: return "swap-wide";
  }
  return "?";
}

std::optional<Representation> representation_from_name(std::string_view name) {
  if (name == "swap-narrow" || name == "narrow") return Representation::SwapNarrow;
  if (name == "swap-turtle" || name == "turtle") return Representation::SwapTurtle;
  if (name == "swap-wide" || name == "wide") return Representation::SwapWide;
  return std::nullopt;
}

ActionSpace action_space(Representation repr, int width, int height) {
  ActionSpace space;
  switch (repr) {
    case Representation::SwapNarrow:
      space.sizes = {2};
      break;
    case Representation::SwapTurtle:
      space.sizes = {4, 4, 2};
      break;
    case Representation::SwapWide:
      space.sizes = {width, height, width, height, 2};
      break;
  }
  space.total = 1;
  for (const int s : space.sizes) space.total *= s;
  return space;
}

void validate_env_config(const EnvConfig& cfg) {
  if (cfg.max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
  if (cfg.max_changes < 1) throw std::invalid_argument("max_changes must be >= 1");
  if (cfg.max_changes > cfg.max_steps) {
    throw std::invalid_argument("max_changes must not exceed max_steps");
  }
  if (cfg.n_sims < 2 || cfg.n_sims % 2 != 0) {
    throw std::invalid_argument("n_sims must be even and >= 2");
  }
  if (cfg.workers < 1) throw std::invalid_argument("workers must be >= 1");
  validate_sim_config(cfg.sim);
  if (cfg.reward.alpha < 0.0) throw std::invalid_argument("alpha must be >= 0");
  if (cfg.reward.balance_tolerance < 0.0) {
    throw std::invalid_argument("balance_tolerance must be >= 0");
  }
}

const char* termination_name(SwapTermination t) {
  switch (t) {
    case SwapTermination::Running: return "running";
    case SwapTermination::Balanced: return "balanced";
    case SwapTermination::ChangeCap: return "change-cap";
    case SwapTermination::StepCap: return "step-cap";
  }
  return "?";
}

Observation encode_obs(const Level& level, Representation repr,
                       const std::array<Position, 2>& cursors) {
  const Observation tiles = encode_tile_planes(level);
  if (repr == Representation::SwapWide) return tiles;
  const int cells = level.cell_count();
  Observation obs = Observation::Zero(tiles.size() + 2 * cells);
  obs.head(tiles.size()) = tiles;
  for (int c = 0; c < 2; ++c) {
    if (!level.in_bounds(cursors[static_cast<size_t>(c)])) {
      throw std::invalid_argument("cursor out of bounds");
    }
    obs[tiles.size() + c * cells + level.index(cursors[static_cast<size_t>(c)])] = 1.0;
  }
  return obs;
}

SwapEnv::SwapEnv(EnvConfig cfg, int width, int height)
    : cfg_(cfg), width_(width), height_(height) {
  validate_env_config(cfg_);
  if (width_ < 2 || height_ < 2) throw std::invalid_argument("grid must be at least 2x2");
  level_ = Level::filled(width_, height_, TileKind::Grass);
}

std::vector<int> SwapEnv::action_sizes() const {
  return action_space(cfg_.repr, width_, height_).sizes;
}

int SwapEnv::obs_len() const {
  const int planes = cfg_.repr == Representation::SwapWide ? 5 : 7;
  return planes * width_ * height_;
}

Observation SwapEnv::reset(const Level& level, std::uint64_t seed) {
  if (level.width() != width_ || level.height() != height_) {
    throw std::invalid_argument("level does not match configured grid size");
  }
  if (!validate(level).valid()) {
    throw std::invalid_argument("swap env requires a valid level");
  }
  level_ = level;
  sim_base_ = derive_seed(seed, 0);
  cursor_rng_ = Rng(derive_seed(seed, 1));
  steps_ = 0;
  changes_ = 0;
  estimate_calls_ = 0;
  done_ = false;
  termination_ = SwapTermination::Running;
  sample_cursors();
  // Common random numbers: every estimate in the episode replays the same
  // match seeds, so reward contrasts isolate the swap's effect exactly.
  b_ = estimate_balance(level_, cfg_.sim, cfg_.n_sims, sim_base_, cfg_.workers).b;
  ++estimate_calls_;
  b0_ = b_;
  check_done();
  return encode_obs(level_, cfg_.repr, cursors_);
}

SwapEnv::Step SwapEnv::step(const std::vector<int>& action) {
  if (done_) throw std::logic_error("step called on a finished episode");
  const auto sizes = action_sizes();
  if (action.size() != sizes.size()) {
    throw std::out_of_range("action has wrong number of components");
  }
  for (size_t i = 0; i < action.size(); ++i) {
    if (action[i] < 0 || action[i] >= sizes[i]) {
      throw std::out_of_range("action component out of range");
    }
  }

  Step out;
  switch (cfg_.repr) {
    case Representation::SwapNarrow: {
      if (action[0] == 1) attempt_swap(cursors_[0], cursors_[1], out);
      else out.cells = cursors_;
      sample_cursors();  // fresh pair every step, swap or not
      break;
    }
    case Representation::SwapTurtle: {
      if (action[2] == 1) {
        attempt_swap(cursors_[0], cursors_[1], out);
      } else {
        out.cells = cursors_;
        for (int c = 0; c < 2; ++c) {
          const int d = action[static_cast<size_t>(c)];
          auto& cur = cursors_[static_cast<size_t>(c)];
          cur.row = clamp(cur.row + kDr[d], 0, height_ - 1);
          cur.col = clamp(cur.col + kDc[d], 0, width_ - 1);
        }
      }
      break;
    }
    case Representation::SwapWide: {
      const Position a{action[1], action[0]};
      const Position b{action[3], action[2]};
      if (action[4] == 1) attempt_swap(a, b, out);
      else out.cells = {a, b};
      break;
    }
  }

  ++steps_;
  check_done();
  out.obs = encode_obs(level_, cfg_.repr, cursors_);
  out.done = done_;
  return out;
}

void SwapEnv::sample_cursors() {
  if (cfg_.repr == Representation::SwapWide) return;
  const int cells = width_ * height_;
  const int first = cursor_rng_.uniform_int(cells);
  int second = cursor_rng_.uniform_int(cells - 1);
  if (second >= first) ++second;  // uniform over distinct pairs
  cursors_[0] = {first / width_, first % width_};
  cursors_[1] = {second / width_, second % width_};
}

void SwapEnv::attempt_swap(Position a, Position b, Step& out) {
  out.cells = {a, b};
  if (level_.at(a) == level_.at(b)) return;  // same kind: no effect
  level_.swap_cells(a, b);
  if (!validate(level_).valid()) {
    level_.swap_cells(a, b);  // connectivity guard: reject and restore
    return;
  }
  out.executed = true;
  out.swapped = {level_.at(b), level_.at(a)};  // kinds as they were before
  ++changes_;
  const double b_prev = b_;
  b_ = estimate_balance(level_, cfg_.sim, cfg_.n_sims, sim_base_, cfg_.workers).b;
  ++estimate_calls_;
  out.reward = compute_reward(b_prev, b_, cfg_.reward);
}

void SwapEnv::check_done() {
  if (is_balanced(b_, cfg_.reward)) {
    done_ = true;
    termination_ = SwapTermination::Balanced;
  } else if (changes_ >= cfg_.max_changes) {
    done_ = true;
    termination_ = SwapTermination::ChangeCap;
  } else if (steps_ >= cfg_.max_steps) {
    done_ = true;
    termination_ = SwapTermination::StepCap;
  }
}

LevelStream::LevelStream(GenConfig gen, std::uint64_t seed) : gen_(gen), seed_(seed) {
  validate_gen_config(gen_);
}

Level LevelStream::next() {
  GenConfig cfg = gen_;
  cfg.seed = derive_seed(seed_, count_);
  ++count_;
  return generate(cfg);
}

TrainingEnv::TrainingEnv(EnvConfig cfg, GenConfig gen, std::uint64_t seed)
    : env_(cfg, gen.width, gen.height),
      supply_([stream = std::make_shared<LevelStream>(gen, derive_seed(seed, 0))] {
        return stream->next();
      }),
      seed_(derive_seed(seed, 1)) {}

TrainingEnv::TrainingEnv(EnvConfig cfg, int width, int height, LevelSupplier supplier,
                         std::uint64_t seed)
    : env_(cfg, width, height), supply_(std::move(supplier)), seed_(derive_seed(seed, 1)) {
  if (!supply_) throw std::invalid_argument("level supplier must be callable");
}

Observation TrainingEnv::reset() {
  for (int tries = 0; tries < 10000; ++tries) {
    const Level level = supply_();
    Observation obs = env_.reset(level, derive_seed(seed_, resets_));
    ++resets_;
    if (!env_.done()) {
      ++episodes_;
      return obs;
    }
    ++skipped_;
  }
  throw std::runtime_error("level stream produced 10000 balanced levels in a row");
}

TrainingEnv::Step TrainingEnv::step(const std::vector<int>& action) {
  auto result = env_.step(action);
  return {std::move(result.obs), result.reward, result.done};
}

}  // namespace tilebal
