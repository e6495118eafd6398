#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tilebal/balance.hpp"
#include "tilebal/generator.hpp"
#include "tilebal/policy.hpp"
#include "tilebal/swap_env.hpp"

// Evaluation protocol: build a dataset of generated levels with their initial
// balance b0, run one greedy balancing episode per level, and aggregate the
// headline metrics (balanced %, improved %, changes, episode length), the
// before/after b histograms, and the swap-pair frequency table. Levels that
// start balanced are excluded from all percentages.

namespace tilebal {

struct DatasetRow {
  Level level;
  std::uint64_t seed = 0;  // env seed; reset(level, seed) reproduces b0
  double b0 = 0.0;
};

using Dataset = std::vector<DatasetRow>;

/// `count` generated levels with b0 estimated at n_sims matches. The stored
/// seed is derived so that SwapEnv::reset(level, seed) with the same sim
/// config lands on exactly b0.
Dataset build_dataset(const GenConfig& gen, int count, int n_sims, const SimConfig& sim,
                      std::uint64_t seed, int workers = 1);

/// One JSON object per line: {"level": {...}, "seed": ..., "b0": ...}.
std::string dataset_jsonl(const Dataset& ds);
Dataset parse_dataset(const std::string& text);
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

/// Action chooser: observation plus a per-episode rng stream (ignored by
/// deterministic policies).
using PolicyFn = std::function<std::vector<int>(const Observation&, Rng&)>;

PolicyFn greedy_policy(const PolicyNet& net);
PolicyFn sampling_policy(const PolicyNet& net);
PolicyFn random_policy(std::vector<int> action_sizes);
/// Baseline that never sets the swap flag (narrow: skip; turtle: move north;
/// wide: address cell (0,0)).
PolicyFn never_swap_policy(Representation repr);

struct EpisodeRecord {
  int index = 0;
  std::uint64_t seed = 0;
  double b0 = 0.0;
  double b_final = 0.0;
  int steps = 0;
  int changes = 0;
  SwapTermination termination = SwapTermination::Running;
  bool initially_balanced = false;
  std::vector<std::array<TileKind, 2>> swaps;  // kinds of each executed swap
};

struct EvalReport {
  int total = 0;               // dataset rows
  int initially_balanced = 0;  // excluded from the percentages below
  int evaluated = 0;
  double balanced_pct = 0.0;   // episodes ending balanced
  double improved_pct = 0.0;   // |b_final - 0.5| < |b0 - 0.5|
  double avg_changes = 0.0, std_changes = 0.0;
  double avg_steps = 0.0, std_steps = 0.0;
  // evaluated-episode termination counts: balanced, change cap, step cap
  std::array<int, 3> terminations{};
};

struct EvalResult {
  EvalReport report;
  std::vector<EpisodeRecord> episodes;  // dataset order, one per row
};

/// One greedy episode per dataset row; episode i draws policy randomness (if
/// any) from derive_seed(policy_seed, i), so results are independent of
/// worker count.
EvalResult evaluate(const PolicyFn& policy, const Dataset& ds, const EnvConfig& env_cfg,
                    std::uint64_t policy_seed = 0, int workers = 1);

std::string report_json(const EvalReport& report);
std::string report_table(const EvalReport& report);
std::string episodes_jsonl(const std::vector<EpisodeRecord>& episodes);

/// The ten unordered pairs of distinct authored tile kinds, canonical order.
std::array<std::array<TileKind, 2>, 10> swap_pairs();

struct SwapPairStat {
  TileKind a = TileKind::Grass, b = TileKind::Grass;
  long count = 0;        // executed swaps of this pair
  double weighted = 0.0; // count scaled by inverse tile-occurrence product
  double share = 0.0;    // weighted, normalized over the 10 pairs
};

struct SwapFrequencyTable {
  std::array<double, 5> occurrence{};  // dataset tile shares, kLevelTileKinds order
  std::array<SwapPairStat, 10> pairs;  // swap_pairs() order
};

/// Counts executed swap pairs over the episodes and factors out how often the
/// two kinds occur in the dataset at all.
SwapFrequencyTable swap_frequency(const std::vector<EpisodeRecord>& episodes,
                                  const Dataset& ds);

/// Per-pair relative share difference of model vs baseline:
/// (model - baseline) / baseline.
std::array<double, 10> relative_difference(const SwapFrequencyTable& model,
                                           const SwapFrequencyTable& baseline);

std::string swap_frequency_csv(const SwapFrequencyTable& model,
                               const SwapFrequencyTable& baseline);
std::string swap_frequency_table(const SwapFrequencyTable& model,
                                 const SwapFrequencyTable& baseline);

/// Histogram of b values binned at the n_sims+1 decisive outcomes: bin k is
/// centered at k/n_sims with edges halfway to its neighbors.
struct HistogramTable {
  std::vector<double> centers;
  std::vector<int> before;
  std::vector<int> after;
};

HistogramTable compare_histograms(const std::vector<double>& before,
                                  const std::vector<double>& after, int n_sims);
std::string histogram_csv(const HistogramTable& table);
std::string histogram_ascii(const HistogramTable& table);

}  // namespace tilebal
