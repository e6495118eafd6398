#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tilebal/sim.hpp"

// The balancing state b of a level: play it n times with the scripted agents
// and fold the winner sets into a scalar in [0, 1]. b = 0 means player 0 wins
// every match, b = 1 means player 1 does, b = 0.5 means both win equally
// often. Draws count both indices, so a record of n matches has between n and
// 2n winner entries.

namespace tilebal {

/// Per-simulation winner sets of one balance estimate.
using WinRecord = std::vector<Winners>;

struct BalanceEstimate {
  double b = 0.0;
  int n = 0;                      // number of simulated matches
  std::array<int, 2> wins{};      // per-player win counts (draws count for both)
  std::uint64_t seed_base = 0;
  WinRecord record;               // per-match winner sets, in seed order
};

enum class RewardMode {
  Literal,   // r = b_prev - b_now (+ alpha when balanced)
  Distance,  // r = |b_prev - 0.5| - |b_now - 0.5| (+ alpha when balanced)
};

struct RewardConfig {
  double alpha = 0.5;              // bonus for landing exactly on 0.5
  RewardMode mode = RewardMode::Distance;
  double balance_tolerance = 0.0;  // 0 = exact equality test against 0.5
};

/// True iff b counts as balanced under the configured tolerance.
inline bool is_balanced(double b, const RewardConfig& cfg) {
  return std::abs(b - 0.5) <= cfg.balance_tolerance;
}

/// Mean winner index over all winner entries of the record: sum of winner
/// indices divided by the total number of winners. Empty records (or entries
/// without a winner) are an input error.
double compute_b(const WinRecord& record);

/// Reward for moving the balancing state from b_prev to b_now. Both must be
/// in [0, 1]. Steps that change nothing are rewarded 0 by the environment and
/// never reach this function.
double compute_reward(double b_prev, double b_now, const RewardConfig& cfg);

/// Plays the level n times (n even, >= 2) with match seeds
/// derive_seed(seed_base, i) and aggregates the outcomes. The first n matches
/// of a larger estimate with the same seed_base are identical (nested seeds).
BalanceEstimate estimate_balance(const Level& level, const SimConfig& sim, int n,
                                 std::uint64_t seed_base, int workers = 1);

struct CalibrationPoint {
  int n = 0;
  double mu = 0.0;     // mean over levels of |w_n - w_{n-2}|
  double sigma = 0.0;  // population standard deviation of the same values
};

struct CalibrationResult {
  std::vector<CalibrationPoint> curve;  // even n = 4, 6, ..., n_max
  std::optional<int> chosen_n;          // smallest n with mu + sigma < threshold
};

/// Chooses how many simulations are needed for a stable balance estimate: for
/// each even n up to n_max, measures how much player 0's win rate over the
/// first n matches moves relative to the first n-2 (same nested seed-derived
/// runs), and picks the smallest n whose mean shift plus one standard
/// deviation falls below the threshold.
CalibrationResult calibrate_n(const std::vector<Level>& levels, const SimConfig& sim,
                              int n_max, double threshold, std::uint64_t seed,
                              int workers = 1);

/// CSV with header "n,mu,sigma", one row per curve point.
std::string calibration_csv(const CalibrationResult& result);

/// Fixed-width text table of the curve for quick plotting by eye.
std::string calibration_table(const CalibrationResult& result, double threshold);

}  // namespace tilebal
