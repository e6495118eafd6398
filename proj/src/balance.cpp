#include "tilebal/balance.hpp"

#include <cmath>
#include <sstream>

#include "tilebal/parallel.hpp"

namespace tilebal {

double compute_b(const WinRecord& record) {
  if (record.empty()) throw std::invalid_argument("win record is empty");
  int index_sum = 0;
  int winner_count = 0;
  for (const Winners& winners : record) {
    if (winners.count() == 0) {
      throw std::invalid_argument("win record entry has no winner");
    }
    index_sum += winners.index_sum();
    winner_count += winners.count();
  }
  return static_cast<double>(index_sum) / static_cast<double>(winner_count);
}

double compute_reward(double b_prev, double b_now, const RewardConfig& cfg) {
  if (b_prev < 0.0 || b_prev > 1.0 || b_now < 0.0 || b_now > 1.0) {
    throw std::invalid_argument("balancing states must be in [0, 1]");
  }
  const double bonus = is_balanced(b_now, cfg) ? cfg.alpha : 0.0;
  switch (cfg.mode) {
    case RewardMode::Literal:
      return b_prev - b_now + bonus;
    case RewardMode::Distance:
      return std::abs(b_prev - 0.5) - std::abs(b_now - 0.5) + bonus;
  }
  throw std::logic_error("unknown reward mode");
}

BalanceEstimate estimate_balance(const Level& level, const SimConfig& sim, int n,
                                 std::uint64_t seed_base, int workers) {
  if (n < 2 || n % 2 != 0) {
    throw std::invalid_argument("simulation count must be even and >= 2, got " +
                                std::to_string(n));
  }

  BalanceEstimate estimate;
  estimate.n = n;
  estimate.seed_base = seed_base;
  estimate.record.resize(static_cast<size_t>(n));
  parallel_for(n, workers, [&](int i) {
    const MatchOutcome outcome =
        run_match(level, sim, derive_seed(seed_base, static_cast<std::uint64_t>(i)));
    estimate.record[static_cast<size_t>(i)] = outcome.winners;
  });

  for (const Winners& winners : estimate.record) {
    if (winners.player0) estimate.wins[0] += 1;
    if (winners.player1) estimate.wins[1] += 1;
  }
  estimate.b = compute_b(estimate.record);
  return estimate;
}

CalibrationResult calibrate_n(const std::vector<Level>& levels, const SimConfig& sim,
                              int n_max, double threshold, std::uint64_t seed,
                              int workers) {
  if (levels.empty()) throw std::invalid_argument("calibration needs at least one level");
  if (n_max < 4 || n_max % 2 != 0) {
    throw std::invalid_argument("n_max must be even and >= 4, got " + std::to_string(n_max));
  }

  const int num_levels = static_cast<int>(levels.size());
  // win0[j][i] = 1 iff player 0 is among the winners of match i on level j.
  std::vector<std::vector<int>> win0(static_cast<size_t>(num_levels));
  parallel_for(num_levels, workers, [&](int j) {
    const std::uint64_t level_seed = derive_seed(seed, static_cast<std::uint64_t>(j));
    auto& row = win0[static_cast<size_t>(j)];
    row.resize(static_cast<size_t>(n_max));
    for (int i = 0; i < n_max; ++i) {
      const MatchOutcome outcome =
          run_match(levels[static_cast<size_t>(j)], sim,
                    derive_seed(level_seed, static_cast<std::uint64_t>(i)));
      row[static_cast<size_t>(i)] = outcome.winners.player0 ? 1 : 0;
    }
  });

  auto win_rate = [&](int j, int n) {
    int wins = 0;
    for (int i = 0; i < n; ++i) wins += win0[static_cast<size_t>(j)][static_cast<size_t>(i)];
    return static_cast<double>(wins) / static_cast<double>(n);
  };

  CalibrationResult result;
  for (int n = 4; n <= n_max; n += 2) {
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int j = 0; j < num_levels; ++j) {
      const double dev = std::abs(win_rate(j, n) - win_rate(j, n - 2));
      sum += dev;
      sum_sq += dev * dev;
    }
    const double mu = sum / num_levels;
    const double variance = std::max(0.0, sum_sq / num_levels - mu * mu);
    const double sigma = std::sqrt(variance);
    result.curve.push_back({n, mu, sigma});
    if (!result.chosen_n && mu + sigma < threshold) result.chosen_n = n;
  }
  return result;
}

std::string calibration_csv(const CalibrationResult& result) {
  std::ostringstream os;
  os << "n,mu,sigma\n";
  for (const CalibrationPoint& point : result.curve) {
    os << point.n << "," << point.mu << "," << point.sigma << "\n";
  }
  return os.str();
}

std::string calibration_table(const CalibrationResult& result, double threshold) {
  std::ostringstream os;
  os << "   n        mu     sigma  mu+sigma\n";
  for (const CalibrationPoint& point : result.curve) {
    char line[96];
    std::snprintf(line, sizeof(line), "%4d  %8.4f  %8.4f  %8.4f%s\n", point.n, point.mu,
                  point.sigma, point.mu + point.sigma,
                  point.mu + point.sigma < threshold ? "  <" : "");
    os << line;
  }
  return os.str();
}

}  // namespace tilebal
