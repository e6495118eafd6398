#include "tilebal/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "tilebal/parallel.hpp"

namespace tilebal {

namespace {

nlohmann::json level_to_json(const Level& level) {
  std::vector<int> ids;
  ids.reserve(static_cast<size_t>(level.cell_count()));
  for (const TileKind kind : level.cells()) ids.push_back(static_cast<int>(kind));
  return nlohmann::json{{"width", level.width()}, {"height", level.height()}, {"cells", ids}};
}

Level level_from_json(const nlohmann::json& j) {
  const int width = j.at("width").get<int>();
  const int height = j.at("height").get<int>();
  std::vector<TileKind> cells;
  for (const auto& id : j.at("cells")) {
    const int v = id.get<int>();
    if (v < 0 || v >= kTileKindCount) throw std::invalid_argument("unknown tile id in level JSON");
    cells.push_back(static_cast<TileKind>(v));
  }
  return Level(width, height, std::move(cells));
}

struct Accumulator {
  double sum = 0.0, sum_sq = 0.0;
  int n = 0;

  void add(double x) {
    sum += x;
    sum_sq += x * x;
    ++n;
  }
  double mean() const { return n ? sum / n : 0.0; }
  double stddev() const {
    if (!n) return 0.0;
    const double m = mean();
    return std::sqrt(std::max(0.0, sum_sq / n - m * m));
  }
};

int pair_index(TileKind a, TileKind b) {
  const auto pairs = swap_pairs();
  int ia = obs_plane_index(a), ib = obs_plane_index(b);
  if (ia > ib) std::swap(a, b);
  for (size_t k = 0; k < pairs.size(); ++k) {
    if (pairs[k][0] == a && pairs[k][1] == b) return static_cast<int>(k);
  }
  throw std::invalid_argument("not a swap pair of distinct authored kinds");
}

}  // namespace

Dataset build_dataset(const GenConfig& gen, int count, int n_sims, const SimConfig& sim,
                      std::uint64_t seed, int workers) {
  if (count < 1) throw std::invalid_argument("dataset count must be >= 1");
  validate_gen_config(gen);
  validate_sim_config(sim);
  if (n_sims < 2 || n_sims % 2 != 0) throw std::invalid_argument("n_sims must be even and >= 2");

  const std::uint64_t level_base = derive_seed(seed, 0);
  const std::uint64_t env_base = derive_seed(seed, 1);
  Dataset ds(static_cast<size_t>(count));
  parallel_for(count, workers, [&](int i) {
    GenConfig g = gen;
    g.seed = derive_seed(level_base, static_cast<std::uint64_t>(i));
    DatasetRow row;
    row.level = generate(g);
    row.seed = derive_seed(env_base, static_cast<std::uint64_t>(i));
    // Same seed chain as SwapEnv::reset, so reset(level, seed) lands on b0.
    row.b0 = estimate_balance(row.level, sim, n_sims, derive_seed(row.seed, 0)).b;
    ds[static_cast<size_t>(i)] = std::move(row);
  });
  return ds;
}

std::string dataset_jsonl(const Dataset& ds) {
  std::ostringstream out;
  for (const auto& row : ds) {
    nlohmann::json j;
    j["level"] = level_to_json(row.level);
    j["seed"] = row.seed;
    j["b0"] = row.b0;
    out << j.dump() << "\n";
  }
  return out.str();
}

Dataset parse_dataset(const std::string& text) {
  Dataset ds;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    DatasetRow row;
    row.level = level_from_json(j.at("level"));
    row.seed = j.at("seed").get<std::uint64_t>();
    row.b0 = j.at("b0").get<double>();
    ds.push_back(std::move(row));
  }
  return ds;
}

void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset: " + path);
  out << dataset_jsonl(ds);
  if (!out) throw std::runtime_error("dataset write failed: " + path);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read dataset: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_dataset(buffer.str());
}

PolicyFn greedy_policy(const PolicyNet& net) {
  return [net = &net](const Observation& obs, Rng&) { return net->act_greedy(obs); };
}

PolicyFn sampling_policy(const PolicyNet& net) {
  return [net = &net](const Observation& obs, Rng& rng) { return net->sample(obs, rng).action; };
}

PolicyFn random_policy(std::vector<int> action_sizes) {
  return [sizes = std::move(action_sizes)](const Observation&, Rng& rng) {
    std::vector<int> action;
    action.reserve(sizes.size());
    for (const int s : sizes) action.push_back(rng.uniform_int(s));
    return action;
  };
}

PolicyFn never_swap_policy(Representation repr) {
  const size_t components = action_space(repr, 2, 2).sizes.size();
  return [components](const Observation&, Rng&) {
    return std::vector<int>(components, 0);  // swap flag is always the 0 of its head
  };
}

EvalResult evaluate(const PolicyFn& policy, const Dataset& ds, const EnvConfig& env_cfg,
                    std::uint64_t policy_seed, int workers) {
  if (ds.empty()) throw std::invalid_argument("empty dataset");
  EvalResult result;
  result.episodes.resize(ds.size());
  parallel_for(static_cast<int>(ds.size()), workers, [&](int i) {
    const DatasetRow& row = ds[static_cast<size_t>(i)];
    SwapEnv env(env_cfg, row.level.width(), row.level.height());
    Observation obs = env.reset(row.level, row.seed);
    Rng rng(derive_seed(policy_seed, static_cast<std::uint64_t>(i)));

    EpisodeRecord rec;
    rec.index = i;
    rec.seed = row.seed;
    rec.b0 = env.b0();
    rec.initially_balanced = env.done();
    while (!env.done()) {
      const auto step = env.step(policy(obs, rng));
      if (step.executed) rec.swaps.push_back(step.swapped);
      obs = step.obs;
    }
    rec.b_final = env.b();
    rec.steps = env.steps();
    rec.changes = env.changes();
    rec.termination = env.termination();
    result.episodes[static_cast<size_t>(i)] = std::move(rec);
  });

  EvalReport& rep = result.report;
  rep.total = static_cast<int>(ds.size());
  Accumulator changes, steps;
  int balanced = 0, improved = 0;
  for (const auto& rec : result.episodes) {
    if (rec.initially_balanced) {
      ++rep.initially_balanced;
      continue;
    }
    ++rep.evaluated;
    changes.add(rec.changes);
    steps.add(rec.steps);
    switch (rec.termination) {
      case SwapTermination::Balanced: ++rep.terminations[0]; break;
      case SwapTermination::ChangeCap: ++rep.terminations[1]; break;
      case SwapTermination::StepCap: ++rep.terminations[2]; break;
      case SwapTermination::Running: break;  // unreachable: episodes run to done
    }
    if (rec.termination == SwapTermination::Balanced) ++balanced;
    if (std::abs(rec.b_final - 0.5) < std::abs(rec.b0 - 0.5)) ++improved;
  }
  if (rep.evaluated > 0) {
    rep.balanced_pct = 100.0 * balanced / rep.evaluated;
    rep.improved_pct = 100.0 * improved / rep.evaluated;
    rep.avg_changes = changes.mean();
    rep.std_changes = changes.stddev();
    rep.avg_steps = steps.mean();
    rep.std_steps = steps.stddev();
  }
  return result;
}

std::string report_json(const EvalReport& report) {
  nlohmann::json j;
  j["total"] = report.total;
  j["initially_balanced"] = report.initially_balanced;
  j["evaluated"] = report.evaluated;
  j["balanced_pct"] = report.balanced_pct;
  j["improved_pct"] = report.improved_pct;
  j["avg_changes"] = report.avg_changes;
  j["std_changes"] = report.std_changes;
  j["avg_steps"] = report.avg_steps;
  j["std_steps"] = report.std_steps;
  j["terminations"] = {{"balanced", report.terminations[0]},
                       {"change_cap", report.terminations[1]},
                       {"step_cap", report.terminations[2]}};
  return j.dump(2);
}

std::string report_table(const EvalReport& report) {
  std::ostringstream out;
  out << std::fixed;
  out << "levels            " << report.total << " (" << report.initially_balanced
      << " initially balanced, excluded)\n";
  out << "evaluated         " << report.evaluated << "\n";
  out << std::setprecision(1);
  out << "balanced          " << report.balanced_pct << "%\n";
  out << "improved          " << report.improved_pct << "%\n";
  out << "avg changes       " << report.avg_changes << " +/- " << report.std_changes << "\n";
  out << "avg episode len   " << report.avg_steps << " +/- " << report.std_steps << "\n";
  out << "terminations      balanced " << report.terminations[0] << ", change cap "
      << report.terminations[1] << ", step cap " << report.terminations[2] << "\n";
  return out.str();
}

std::string episodes_jsonl(const std::vector<EpisodeRecord>& episodes) {
  std::ostringstream out;
  for (const auto& rec : episodes) {
    nlohmann::json j;
    j["index"] = rec.index;
    j["seed"] = rec.seed;
    j["b0"] = rec.b0;
    j["b_final"] = rec.b_final;
    j["steps"] = rec.steps;
    j["changes"] = rec.changes;
    j["termination"] = termination_name(rec.termination);
    j["initially_balanced"] = rec.initially_balanced;
    auto swaps = nlohmann::json::array();
    for (const auto& pair : rec.swaps) {
      swaps.push_back({std::string(1, tile_code(pair[0])), std::string(1, tile_code(pair[1]))});
    }
    j["swaps"] = swaps;
    out << j.dump() << "\n";
  }
  return out.str();
}

std::array<std::array<TileKind, 2>, 10> swap_pairs() {
  std::array<std::array<TileKind, 2>, 10> pairs;
  size_t k = 0;
  for (size_t i = 0; i < kLevelTileKinds.size(); ++i) {
    for (size_t j = i + 1; j < kLevelTileKinds.size(); ++j) {
      pairs[k++] = {kLevelTileKinds[i], kLevelTileKinds[j]};
    }
  }
  return pairs;
}

SwapFrequencyTable swap_frequency(const std::vector<EpisodeRecord>& episodes,
                                  const Dataset& ds) {
  SwapFrequencyTable table;
  long total_cells = 0;
  std::array<long, 5> counts{};
  for (const auto& row : ds) {
    const TileHistogram hist = count_tiles(row.level);
    for (size_t k = 0; k < kLevelTileKinds.size(); ++k) {
      counts[k] += hist[static_cast<size_t>(kLevelTileKinds[k])];
    }
    total_cells += row.level.cell_count();
  }
  if (total_cells == 0) throw std::invalid_argument("empty dataset");
  for (size_t k = 0; k < counts.size(); ++k) {
    table.occurrence[k] = static_cast<double>(counts[k]) / static_cast<double>(total_cells);
  }

  const auto pairs = swap_pairs();
  for (size_t k = 0; k < pairs.size(); ++k) {
    table.pairs[k].a = pairs[k][0];
    table.pairs[k].b = pairs[k][1];
  }
  for (const auto& rec : episodes) {
    for (const auto& swap : rec.swaps) ++table.pairs[static_cast<size_t>(pair_index(swap[0], swap[1]))].count;
  }

  double total_weighted = 0.0;
  for (auto& pair : table.pairs) {
    const double pa = table.occurrence[static_cast<size_t>(obs_plane_index(pair.a))];
    const double pb = table.occurrence[static_cast<size_t>(obs_plane_index(pair.b))];
    pair.weighted = (pa > 0.0 && pb > 0.0) ? static_cast<double>(pair.count) / (pa * pb) : 0.0;
    total_weighted += pair.weighted;
  }
  if (total_weighted > 0.0) {
    for (auto& pair : table.pairs) pair.share = pair.weighted / total_weighted;
  }
  return table;
}

std::array<double, 10> relative_difference(const SwapFrequencyTable& model,
                                           const SwapFrequencyTable& baseline) {
  std::array<double, 10> diff{};
  for (size_t k = 0; k < diff.size(); ++k) {
    const double base = baseline.pairs[k].share;
    const double delta = model.pairs[k].share - base;
    diff[k] = base > 0.0 ? delta / base : delta;
  }
  return diff;
}

namespace {

std::string pair_label(const SwapPairStat& pair) {
  std::string label;
  label += tile_code(pair.a);
  label += "<->";
  label += tile_code(pair.b);
  return label;
}

}  // namespace

std::string swap_frequency_csv(const SwapFrequencyTable& model,
                               const SwapFrequencyTable& baseline) {
  const auto diff = relative_difference(model, baseline);
  std::ostringstream out;
  out.precision(17);
  out << "pair,count_model,share_model,count_random,share_random,relative_difference\n";
  for (size_t k = 0; k < model.pairs.size(); ++k) {
    out << pair_label(model.pairs[k]) << ',' << model.pairs[k].count << ','
        << model.pairs[k].share << ',' << baseline.pairs[k].count << ','
        << baseline.pairs[k].share << ',' << diff[k] << '\n';
  }
  return out.str();
}

std::string swap_frequency_table(const SwapFrequencyTable& model,
                                 const SwapFrequencyTable& baseline) {
  const auto diff = relative_difference(model, baseline);
  std::vector<size_t> order(model.pairs.size());
  for (size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](size_t l, size_t r) {
    return model.pairs[l].share > model.pairs[r].share;
  });
  std::ostringstream out;
  out << "pair      model     random    rel.diff\n";
  out << std::fixed << std::setprecision(3);
  for (const size_t k : order) {
    out << std::left << std::setw(10) << pair_label(model.pairs[k]) << std::right
        << std::setw(8) << model.pairs[k].share << "  " << std::setw(8)
        << baseline.pairs[k].share << "  " << std::showpos << std::setw(8) << diff[k]
        << std::noshowpos << "\n";
  }
  return out.str();
}

HistogramTable compare_histograms(const std::vector<double>& before,
                                  const std::vector<double>& after, int n_sims) {
  if (before.size() != after.size()) throw std::invalid_argument("histogram inputs differ in size");
  if (n_sims < 2) throw std::invalid_argument("n_sims must be >= 2");
  HistogramTable table;
  table.centers.resize(static_cast<size_t>(n_sims) + 1);
  table.before.assign(table.centers.size(), 0);
  table.after.assign(table.centers.size(), 0);
  for (size_t k = 0; k < table.centers.size(); ++k) {
    table.centers[k] = static_cast<double>(k) / n_sims;
  }
  auto bin_of = [n_sims](double b) {
    const int bin = static_cast<int>(std::floor(b * n_sims + 0.5));
    return std::clamp(bin, 0, n_sims);
  };
  for (const double b : before) ++table.before[static_cast<size_t>(bin_of(b))];
  for (const double b : after) ++table.after[static_cast<size_t>(bin_of(b))];
  return table;
}

std::string histogram_csv(const HistogramTable& table) {
  std::ostringstream out;
  out.precision(17);
  out << "center,before,after\n";
  for (size_t k = 0; k < table.centers.size(); ++k) {
    out << table.centers[k] << ',' << table.before[k] << ',' << table.after[k] << '\n';
  }
  return out.str();
}

std::string histogram_ascii(const HistogramTable& table) {
  int max_count = 1;
  for (size_t k = 0; k < table.centers.size(); ++k) {
    max_count = std::max({max_count, table.before[k], table.after[k]});
  }
  const int width = 40;
  std::ostringstream out;
  out << std::fixed << std::setprecision(3);
  out << "b        before | after\n";
  for (size_t k = 0; k < table.centers.size(); ++k) {
    const int nb = table.before[k] * width / max_count;
    const int na = table.after[k] * width / max_count;
    out << table.centers[k] << "  " << std::setw(5) << table.before[k] << " "
        << std::string(static_cast<size_t>(nb), '#') << "\n";
    out << "       " << std::setw(5) << table.after[k] << " "
        << std::string(static_cast<size_t>(na), '*') << "\n";
  }
  return out.str();
}

}  // namespace tilebal
