// Command-line pipeline: generate -> calibrate -> train -> balance ->
// evaluate -> analyze, plus render/simulate for poking at single levels.
// Stages hand off through files; every command is reproducible from its
// flags + seed and echoes its effective configuration into the output
// directory. Exit codes: 0 success, 1 runtime failure, 2 bad configuration.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "tilebal/balance.hpp"
#include "tilebal/eval.hpp"
#include "tilebal/generator.hpp"
#include "tilebal/level.hpp"
#include "tilebal/policy.hpp"
#include "tilebal/ppo.hpp"
#include "tilebal/sim.hpp"
#include "tilebal/swap_env.hpp"

namespace fs = std::filesystem;
using namespace tilebal;

namespace {

struct CommonOpts {
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  int workers = 1;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_out_dir = true) {
  cmd->add_option("--seed", opts.seed, "base RNG seed")->capture_default_str();
  cmd->add_option("--workers", opts.workers, "parallel worker threads")
      ->envname("TILEBAL_WORKERS")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  if (with_out_dir) {
    cmd->add_option("--out-dir", opts.out_dir, "output directory")
        ->envname("TILEBAL_OUT_DIR")
        ->capture_default_str();
  }
}

void add_gen_options(CLI::App* cmd, GenConfig& gen) {
  cmd->add_option("--width", gen.width, "level width")->capture_default_str();
  cmd->add_option("--height", gen.height, "level height")->capture_default_str();
  cmd->add_option("--weight-grass", gen.weight_grass, "grass sampling weight")
      ->capture_default_str();
  cmd->add_option("--weight-forest", gen.weight_forest, "forest sampling weight")
      ->capture_default_str();
  cmd->add_option("--weight-stone", gen.weight_stone, "stone sampling weight")
      ->capture_default_str();
  cmd->add_option("--weight-water", gen.weight_water, "water sampling weight")
      ->capture_default_str();
}

void add_sim_options(CLI::App* cmd, SimConfig& sim) {
  cmd->add_option("--food-goal", sim.food_goal, "food needed to win")->capture_default_str();
  cmd->add_option("--max-ticks", sim.max_ticks, "match tick cap")->capture_default_str();
  cmd->add_option("--respawn-prob", sim.scrub_respawn_prob,
                  "per-tick scrub-to-forest respawn probability")
      ->capture_default_str();
}

struct EnvOpts {
  std::string repr = "swap-narrow";
  std::string reward_mode = "distance";
  EnvConfig cfg;
};

void add_env_options(CLI::App* cmd, EnvOpts& env) {
  cmd->add_option("--repr", env.repr, "action representation")
      ->check(CLI::IsMember({"swap-narrow", "swap-turtle", "swap-wide"}))
      ->capture_default_str();
  cmd->add_option("--max-steps", env.cfg.max_steps, "episode step cap")->capture_default_str();
  cmd->add_option("--max-changes", env.cfg.max_changes, "executed-swap cap")
      ->capture_default_str();
  cmd->add_option("--n-sims", env.cfg.n_sims, "simulations per balance estimate")
      ->capture_default_str();
  cmd->add_option("--alpha", env.cfg.reward.alpha, "bonus for landing on b = 0.5")
      ->capture_default_str();
  cmd->add_option("--reward-mode", env.reward_mode, "reward shaping")
      ->check(CLI::IsMember({"distance", "literal"}))
      ->capture_default_str();
  cmd->add_option("--balance-tolerance", env.cfg.reward.balance_tolerance,
                  "|b-0.5| tolerance counting as balanced")
      ->capture_default_str();
}

EnvConfig finish_env(const EnvOpts& opts, const SimConfig& sim, int workers) {
  EnvConfig cfg = opts.cfg;
  cfg.repr = *representation_from_name(opts.repr);
  cfg.reward.mode = opts.reward_mode == "literal" ? RewardMode::Literal : RewardMode::Distance;
  cfg.sim = sim;
  cfg.workers = workers;
  validate_env_config(cfg);
  return cfg;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

/// Effective-config echo: full option state including defaults.
void echo_config(const CLI::App& app, const std::string& out_dir, const std::string& name) {
  fs::create_directories(out_dir);
  write_text(out_dir + "/config." + name + ".ini", app.config_to_str(true, true));
}

Level load_level_arg(const std::string& level_path, const std::string& dataset_path,
                     int index) {
  if (!level_path.empty()) return parse_level(read_text(level_path));
  if (!dataset_path.empty()) {
    const Dataset ds = load_dataset(dataset_path);
    if (index < 0 || index >= static_cast<int>(ds.size())) {
      throw std::invalid_argument("--index out of range for dataset of " +
                                  std::to_string(ds.size()) + " rows");
    }
    return ds[static_cast<size_t>(index)].level;
  }
  throw std::invalid_argument("need --level FILE or --dataset FILE [--index N]");
}

void require_valid(const Level& level) {
  const ValidityReport report = validate(level);
  if (!report.player_count_ok) {
    throw std::invalid_argument("invalid level: needs exactly two player spawns, found " +
                                std::to_string(player_count(level)));
  }
  if (!report.connected_ok) {
    throw std::invalid_argument("invalid level: no passable path between the player spawns");
  }
}

PolicyNet load_checkpoint_for(const std::string& path, const SwapEnv& env) {
  PolicyNet net = PolicyNet::load(path);
  if (net.config().action_sizes != env.action_sizes() ||
      net.config().obs_len != env.obs_len()) {
    throw std::invalid_argument(
        "checkpoint does not match the environment (wrong representation or grid size)");
  }
  return net;
}

// ---------------------------------------------------------------------------

struct GenerateCmd {
  CommonOpts common;
  GenConfig gen;
  SimConfig sim;
  int count = 1000;
  int n_sims = 14;

  int run(const CLI::App& app) {
    if (count < 1) throw std::invalid_argument("--count must be >= 1");
    Dataset ds = build_dataset(gen, count, n_sims, sim, common.seed, common.workers);
    fs::create_directories(common.out_dir);
    const std::string path = common.out_dir + "/dataset.jsonl";
    save_dataset(ds, path);
    echo_config(app, common.out_dir, "generate");

    int balanced = 0, extreme = 0;
    for (const auto& row : ds) {
      if (row.b0 == 0.5) ++balanced;
      if (row.b0 == 0.0 || row.b0 == 1.0) ++extreme;
    }
    std::cout << "wrote " << ds.size() << " levels to " << path << "\n"
              << "initially balanced: " << balanced << " ("
              << 100.0 * balanced / static_cast<double>(ds.size()) << "%), maximally unbalanced: "
              << extreme << " (" << 100.0 * extreme / static_cast<double>(ds.size()) << "%)\n";
    return 0;
  }
};

struct CalibrateCmd {
  CommonOpts common;
  GenConfig gen;
  SimConfig sim;
  std::string dataset_path;
  int count = 100;
  int n_max = 30;
  double threshold = 0.05;

  int run(const CLI::App& app) {
    if (n_max < 4 || n_max % 2 != 0) throw std::invalid_argument("--n-max must be even and >= 4");
    if (!(threshold > 0.0)) throw std::invalid_argument("--threshold must be positive");

    std::vector<Level> levels;
    if (!dataset_path.empty()) {
      for (const auto& row : load_dataset(dataset_path)) levels.push_back(row.level);
    } else {
      if (count < 2) throw std::invalid_argument("--count must be >= 2");
      LevelStream stream(gen, derive_seed(common.seed, 1));
      for (int i = 0; i < count; ++i) levels.push_back(stream.next());
    }

    const CalibrationResult result =
        calibrate_n(levels, sim, n_max, threshold, derive_seed(common.seed, 0), common.workers);
    fs::create_directories(common.out_dir);
    write_text(common.out_dir + "/calibration.csv", calibration_csv(result));
    echo_config(app, common.out_dir, "calibrate");

    std::cout << calibration_table(result, threshold);
    if (result.chosen_n) {
      std::cout << "chosen n = " << *result.chosen_n << " (smallest even n with mu + sigma < "
                << threshold << ")\n";
    } else {
      std::cout << "no n <= " << n_max << " meets mu + sigma < " << threshold << "\n";
    }
    return 0;
  }
};

struct TrainCmd {
  CommonOpts common;
  GenConfig gen;
  SimConfig sim;
  EnvOpts env;
  TrainConfig train_cfg;
  std::string dataset_path;
  int hidden = 64;

  int run(const CLI::App& app) {
    const EnvConfig env_cfg = finish_env(env, sim, common.workers);

    std::optional<TrainingEnv> tenv;
    if (dataset_path.empty()) {
      tenv.emplace(env_cfg, gen, derive_seed(common.seed, 0));
    } else {
      auto ds = std::make_shared<Dataset>(load_dataset(dataset_path));
      if (ds->empty()) throw std::invalid_argument("dataset is empty");
      const int w = ds->front().level.width(), h = ds->front().level.height();
      auto cursor = std::make_shared<size_t>(0);
      tenv.emplace(
          env_cfg, w, h,
          [ds, cursor] { return (*ds)[(*cursor)++ % ds->size()].level; },
          derive_seed(common.seed, 0));
    }

    PolicyConfig pc;
    pc.obs_len = tenv->obs_len();
    pc.action_sizes = tenv->action_sizes();
    pc.hidden = hidden;
    PolicyNet net(pc, derive_seed(common.seed, 1));

    train_cfg.seed = derive_seed(common.seed, 2);
    std::cout << "training " << env.repr << " for " << train_cfg.total_steps << " steps ("
              << net.param_count() << " parameters)\n";
    const TrainResult result = train(*tenv, net, train_cfg, &std::cout);

    fs::create_directories(common.out_dir);
    net.save(common.out_dir + "/checkpoint.json");
    write_text(common.out_dir + "/curve.csv", curve_csv(result.curve));
    echo_config(app, common.out_dir, "train");
    std::cout << "finished: " << result.steps << " steps, " << result.episodes
              << " episodes; checkpoint + curve in " << common.out_dir << "\n";
    return 0;
  }
};

struct BalanceCmd {
  CommonOpts common;
  SimConfig sim;
  EnvOpts env;
  std::string checkpoint;
  std::string level_path;
  std::string dataset_path;
  int index = 0;

  int run(const CLI::App& app) {
    const Level level = load_level_arg(level_path, dataset_path, index);
    require_valid(level);
    const EnvConfig env_cfg = finish_env(env, sim, common.workers);
    SwapEnv swap_env(env_cfg, level.width(), level.height());
    const PolicyNet net = load_checkpoint_for(checkpoint, swap_env);

    Observation obs = swap_env.reset(level, common.seed);
    std::vector<Position> highlights;
    nlohmann::json swaps = nlohmann::json::array();
    while (!swap_env.done()) {
      const auto step = swap_env.step(net.act_greedy(obs));
      if (step.executed) {
        highlights.push_back(step.cells[0]);
        highlights.push_back(step.cells[1]);
        swaps.push_back({{"cells",
                          {{step.cells[0].row, step.cells[0].col},
                           {step.cells[1].row, step.cells[1].col}}},
                         {"kinds",
                          {std::string(1, tile_code(step.swapped[0])),
                           std::string(1, tile_code(step.swapped[1]))}}});
      }
      obs = step.obs;
    }

    if (swap_env.steps() == 0) {
      std::cout << "already balanced (b = " << swap_env.b0() << ")\n"
                << render_ascii(level) << "\n";
    } else {
      std::cout << "before (b = " << swap_env.b0() << "):\n"
                << render_ascii(level, highlights) << "\n"
                << "after (b = " << swap_env.b() << ", " << swap_env.changes() << " swaps, "
                << swap_env.steps() << " steps, " << termination_name(swap_env.termination())
                << "):\n"
                << render_ascii(swap_env.level(), highlights) << "\n";
    }

    nlohmann::json record;
    record["b0"] = swap_env.b0();
    record["b_final"] = swap_env.b();
    record["steps"] = swap_env.steps();
    record["changes"] = swap_env.changes();
    record["termination"] = termination_name(swap_env.termination());
    record["swaps"] = swaps;
    fs::create_directories(common.out_dir);
    write_text(common.out_dir + "/balance.json", record.dump(2) + "\n");
    echo_config(app, common.out_dir, "balance");
    return 0;
  }
};

struct EvaluateCmd {
  CommonOpts common;
  SimConfig sim;
  EnvOpts env;
  std::string checkpoint;
  std::string dataset_path;
  std::string policy_name = "greedy";

  int run(const CLI::App& app) {
    const Dataset ds = load_dataset(dataset_path);
    if (ds.empty()) throw std::invalid_argument("dataset is empty");
    const EnvConfig env_cfg = finish_env(env, sim, common.workers);
    SwapEnv probe(env_cfg, ds.front().level.width(), ds.front().level.height());

    std::optional<PolicyNet> net;
    PolicyFn policy;
    if (policy_name == "greedy" || policy_name == "sampling") {
      if (checkpoint.empty()) {
        throw std::invalid_argument("--checkpoint required for policy '" + policy_name + "'");
      }
      net = load_checkpoint_for(checkpoint, probe);
      policy = policy_name == "greedy" ? greedy_policy(*net) : sampling_policy(*net);
    } else if (policy_name == "random") {
      policy = random_policy(probe.action_sizes());
    } else {
      policy = never_swap_policy(env_cfg.repr);
    }

    const EvalResult result =
        evaluate(policy, ds, env_cfg, derive_seed(common.seed, 0), common.workers);

    std::vector<double> before, after;
    for (const auto& rec : result.episodes) {
      before.push_back(rec.b0);
      after.push_back(rec.b_final);
    }
    const HistogramTable hist = compare_histograms(before, after, env_cfg.n_sims);

    fs::create_directories(common.out_dir);
    write_text(common.out_dir + "/report.json", report_json(result.report) + "\n");
    write_text(common.out_dir + "/episodes.jsonl", episodes_jsonl(result.episodes));
    write_text(common.out_dir + "/histogram.csv", histogram_csv(hist));
    echo_config(app, common.out_dir, "evaluate");

    std::cout << "policy: " << policy_name << "\n"
              << report_table(result.report) << "\n"
              << histogram_ascii(hist);
    return 0;
  }
};

struct AnalyzeCmd {
  CommonOpts common;
  SimConfig sim;
  EnvOpts env;
  std::string checkpoint;
  std::string dataset_path;
  std::string policy_name = "greedy";

  int run(const CLI::App& app) {
    const Dataset ds = load_dataset(dataset_path);
    if (ds.empty()) throw std::invalid_argument("dataset is empty");
    const EnvConfig env_cfg = finish_env(env, sim, common.workers);
    SwapEnv probe(env_cfg, ds.front().level.width(), ds.front().level.height());

    std::optional<PolicyNet> net;
    PolicyFn model;
    if (policy_name == "greedy") {
      if (checkpoint.empty()) throw std::invalid_argument("--checkpoint required");
      net = load_checkpoint_for(checkpoint, probe);
      model = greedy_policy(*net);
    } else {
      model = random_policy(probe.action_sizes());
    }

    const EvalResult model_result =
        evaluate(model, ds, env_cfg, derive_seed(common.seed, 0), common.workers);
    const EvalResult base_result = evaluate(random_policy(probe.action_sizes()), ds, env_cfg,
                                            derive_seed(common.seed, 1), common.workers);

    const SwapFrequencyTable model_table = swap_frequency(model_result.episodes, ds);
    const SwapFrequencyTable base_table = swap_frequency(base_result.episodes, ds);

    fs::create_directories(common.out_dir);
    write_text(common.out_dir + "/swap_frequency.csv",
               swap_frequency_csv(model_table, base_table));
    echo_config(app, common.out_dir, "analyze");

    std::cout << "swap-pair shares, occurrence-weighted (" << policy_name
              << " vs random baseline):\n"
              << swap_frequency_table(model_table, base_table);
    return 0;
  }
};

struct RenderCmd {
  std::string level_path;
  std::string dataset_path;
  int index = 0;

  int run() {
    const Level level = load_level_arg(level_path, dataset_path, index);
    std::cout << level.width() << " x " << level.height() << "\n"
              << render_ascii(level) << "\n";
    const ValidityReport report = validate(level);
    const TileHistogram hist = count_tiles(level);
    std::cout << "spawns: " << player_count(level)
              << (report.connected_ok ? " (connected)" : " (NOT connected)") << "\n";
    std::cout << "tiles:";
    for (const TileKind kind : kAllTileKinds) {
      const int n = hist[static_cast<size_t>(kind)];
      if (n > 0) std::cout << " " << tile_name(kind) << "=" << n;
    }
    std::cout << "\nvalid: " << (report.valid() ? "yes" : "no") << "\n";
    return 0;
  }
};

struct SimulateCmd {
  std::uint64_t seed = 0;
  SimConfig sim;
  std::string level_path;
  std::string dataset_path;
  int index = 0;
  bool trace = false;

  int run() {
    const Level level = load_level_arg(level_path, dataset_path, index);
    require_valid(level);
    const MatchOutcome outcome = run_match(level, sim, seed, trace ? &std::cout : nullptr);
    std::cout << "winner: ";
    if (outcome.winners.is_draw()) std::cout << "draw (both)";
    else std::cout << "player " << (outcome.winners.player0 ? 0 : 1);
    std::cout << " after " << outcome.ticks << " ticks\n";
    for (int p = 0; p < 2; ++p) {
      const PlayerState& ps = outcome.players[static_cast<size_t>(p)];
      std::cout << "player " << p << ": " << (ps.alive ? "alive" : "dead") << ", food collected "
                << ps.food_collected << ", health " << ps.health << ", at (" << ps.pos.row
                << "," << ps.pos.col << ")\n";
    }
    return 0;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-player tile-level balancing: generation, simulation, RL pipeline"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from an INI file");
  app.allow_config_extras(CLI::config_extras_mode::error);

  GenerateCmd generate;
  auto* gen_cmd = app.add_subcommand("generate", "generate a dataset of playable levels");
  gen_cmd->add_option("--count", generate.count, "number of levels")->capture_default_str();
  gen_cmd->add_option("--n-sims", generate.n_sims, "simulations for the b0 estimate")
      ->capture_default_str();
  add_gen_options(gen_cmd, generate.gen);
  add_sim_options(gen_cmd, generate.sim);
  add_common(gen_cmd, generate.common);

  CalibrateCmd calibrate;
  auto* cal_cmd = app.add_subcommand("calibrate", "choose the simulation count n");
  cal_cmd->add_option("--dataset", calibrate.dataset_path, "take levels from a dataset file");
  cal_cmd->add_option("--count", calibrate.count, "levels to sample when no dataset given")
      ->capture_default_str();
  cal_cmd->add_option("--n-max", calibrate.n_max, "largest n to probe")->capture_default_str();
  cal_cmd->add_option("--threshold", calibrate.threshold, "stability threshold on mu + sigma")
      ->capture_default_str();
  add_gen_options(cal_cmd, calibrate.gen);
  add_sim_options(cal_cmd, calibrate.sim);
  add_common(cal_cmd, calibrate.common);

  TrainCmd train_opts;
  auto* train_cmd = app.add_subcommand("train", "train a balancing policy with PPO");
  train_cmd->add_option("--steps", train_opts.train_cfg.total_steps, "environment steps")
      ->capture_default_str();
  train_cmd->add_option("--dataset", train_opts.dataset_path,
                        "train on levels cycled from this dataset instead of fresh ones");
  train_cmd->add_option("--hidden", train_opts.hidden, "trunk width")->capture_default_str();
  train_cmd->add_option("--lr", train_opts.train_cfg.learning_rate, "Adam learning rate")
      ->capture_default_str();
  train_cmd->add_option("--gamma", train_opts.train_cfg.gamma, "discount")->capture_default_str();
  train_cmd->add_option("--gae-lambda", train_opts.train_cfg.gae_lambda, "GAE lambda")
      ->capture_default_str();
  train_cmd->add_option("--clip", train_opts.train_cfg.clip_ratio, "PPO clip ratio")
      ->capture_default_str();
  train_cmd->add_option("--rollout", train_opts.train_cfg.rollout_length, "steps per update")
      ->capture_default_str();
  train_cmd->add_option("--epochs", train_opts.train_cfg.epochs, "epochs per update")
      ->capture_default_str();
  train_cmd->add_option("--minibatch", train_opts.train_cfg.minibatch_size, "minibatch size")
      ->capture_default_str();
  train_cmd->add_option("--entropy-coef", train_opts.train_cfg.entropy_coef, "entropy bonus")
      ->capture_default_str();
  train_cmd->add_option("--value-coef", train_opts.train_cfg.value_coef, "value loss weight")
      ->capture_default_str();
  add_env_options(train_cmd, train_opts.env);
  add_gen_options(train_cmd, train_opts.gen);
  add_sim_options(train_cmd, train_opts.sim);
  add_common(train_cmd, train_opts.common);

  BalanceCmd balance;
  auto* bal_cmd = app.add_subcommand("balance", "balance one level with a trained policy");
  bal_cmd->add_option("--checkpoint", balance.checkpoint, "policy checkpoint")->required();
  bal_cmd->add_option("--level", balance.level_path, "level text file");
  bal_cmd->add_option("--dataset", balance.dataset_path, "dataset file to take the level from");
  bal_cmd->add_option("--index", balance.index, "row in --dataset")->capture_default_str();
  add_env_options(bal_cmd, balance.env);
  add_sim_options(bal_cmd, balance.sim);
  add_common(bal_cmd, balance.common);

  EvaluateCmd evaluate_opts;
  auto* eval_cmd = app.add_subcommand("evaluate", "run the evaluation protocol on a dataset");
  eval_cmd->add_option("--checkpoint", evaluate_opts.checkpoint, "policy checkpoint");
  eval_cmd->add_option("--dataset", evaluate_opts.dataset_path, "dataset file")->required();
  eval_cmd->add_option("--policy", evaluate_opts.policy_name, "action selection")
      ->check(CLI::IsMember({"greedy", "sampling", "random", "never"}))
      ->capture_default_str();
  add_env_options(eval_cmd, evaluate_opts.env);
  add_sim_options(eval_cmd, evaluate_opts.sim);
  add_common(eval_cmd, evaluate_opts.common);

  AnalyzeCmd analyze;
  auto* ana_cmd = app.add_subcommand("analyze", "swap-pair frequency vs the random baseline");
  ana_cmd->add_option("--checkpoint", analyze.checkpoint, "policy checkpoint");
  ana_cmd->add_option("--dataset", analyze.dataset_path, "dataset file")->required();
  ana_cmd->add_option("--policy", analyze.policy_name, "model side: greedy or random")
      ->check(CLI::IsMember({"greedy", "random"}))
      ->capture_default_str();
  add_env_options(ana_cmd, analyze.env);
  add_sim_options(ana_cmd, analyze.sim);
  add_common(ana_cmd, analyze.common);

  RenderCmd render;
  auto* render_cmd = app.add_subcommand("render", "print a level");
  render_cmd->add_option("--level", render.level_path, "level text file");
  render_cmd->add_option("--dataset", render.dataset_path, "dataset file");
  render_cmd->add_option("--index", render.index, "row in --dataset")->capture_default_str();

  SimulateCmd simulate;
  auto* sim_cmd = app.add_subcommand("simulate", "run one match on a level");
  sim_cmd->add_option("--level", simulate.level_path, "level text file");
  sim_cmd->add_option("--dataset", simulate.dataset_path, "dataset file");
  sim_cmd->add_option("--index", simulate.index, "row in --dataset")->capture_default_str();
  sim_cmd->add_option("--seed", simulate.seed, "match seed")->capture_default_str();
  sim_cmd->add_flag("--trace", simulate.trace, "print one line per tick");
  add_sim_options(sim_cmd, simulate.sim);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen_cmd->parsed()) return generate.run(app);
    if (cal_cmd->parsed()) return calibrate.run(app);
    if (train_cmd->parsed()) return train_opts.run(app);
    if (bal_cmd->parsed()) return balance.run(app);
    if (eval_cmd->parsed()) return evaluate_opts.run(app);
    if (ana_cmd->parsed()) return analyze.run(app);
    if (render_cmd->parsed()) return render.run();
    if (sim_cmd->parsed()) return simulate.run();
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;  // unreachable: require_subcommand guarantees a match
}
