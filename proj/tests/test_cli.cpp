#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

// End-to-end checks against the installed binary. TILEBAL_BIN is injected by
// the build; every invocation runs in a scratch directory under tmp.

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = -1;
  std::string output;  // stdout + stderr interleaved
};

const fs::path& scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "tilebal_cli_tests";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

CliResult run_cli(const std::string& args) {
  static int counter = 0;
  const fs::path capture = scratch() / ("capture_" + std::to_string(counter++) + ".txt");
  const std::string cmd =
      std::string(TILEBAL_BIN) + " " + args + " > " + capture.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  CliResult result;
  result.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(capture);
  std::stringstream buffer;
  buffer << in.rdbuf();
  result.output = buffer.str();
  return result;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE_MESSAGE(in.good(), "missing file: " << path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void spit(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

int line_count(const std::string& text) {
  return static_cast<int>(std::count(text.begin(), text.end(), '\n'));
}

// shared across test cases: generate once, reuse as --dataset everywhere
const fs::path& dataset_dir() {
  static const fs::path dir = [] {
    const fs::path d = scratch() / "gen";
    const CliResult r = run_cli("generate --count 5 --n-sims 2 --seed 9 --out-dir " + d.string());
    REQUIRE_MESSAGE(r.code == 0, r.output);
    return d;
  }();
  return dir;
}

const std::string kFastEnv = " --n-sims 2 --max-steps 10 --max-changes 4 ";

}  // namespace

TEST_CASE("argument errors exit with code 2") {
  CHECK(run_cli("").code == 2);
  CHECK(run_cli("frobnicate").code == 2);
  CHECK(run_cli("generate --no-such-flag").code == 2);
  CHECK(run_cli("generate --count 0 --n-sims 2").code == 2);
  CHECK(run_cli("train --repr swap-sideways").code == 2);
  CHECK(run_cli("balance --level x.txt").code == 2);       // --checkpoint is required
  CHECK(run_cli("evaluate --policy random").code == 2);    // --dataset is required
  CHECK(run_cli("render").code == 2);                      // needs --level or --dataset

  const CliResult help = run_cli("--help");
  CHECK(help.code == 0);
  CHECK(help.output.find("generate") != std::string::npos);
  CHECK(help.output.find("simulate") != std::string::npos);
}

TEST_CASE("generate writes a reproducible dataset and echoes its config") {
  const fs::path first = dataset_dir();
  const std::string ds = slurp(first / "dataset.jsonl");
  CHECK(line_count(ds) == 5);

  const std::string ini = slurp(first / "config.generate.ini");
  CHECK(ini.find("count=5") != std::string::npos);
  CHECK(ini.find("seed=9") != std::string::npos);

  const fs::path second = scratch() / "gen_again";
  const CliResult r =
      run_cli("generate --count 5 --n-sims 2 --seed 9 --out-dir " + second.string());
  REQUIRE_MESSAGE(r.code == 0, r.output);
  CHECK(r.output.find("wrote 5 levels") != std::string::npos);
  CHECK(slurp(second / "dataset.jsonl") == ds);
}

TEST_CASE("render reports geometry and validity") {
  const fs::path good = scratch() / "level_good.txt";
  spit(good, "PGF\nGGG\nGGP\n");
  const CliResult r = run_cli("render --level " + good.string());
  CHECK(r.code == 0);
  CHECK(r.output.find("3 x 3") != std::string::npos);
  CHECK(r.output.find("valid: yes") != std::string::npos);

  const CliResult from_ds = run_cli("render --dataset " + (dataset_dir() / "dataset.jsonl").string() +
                                    " --index 2");
  CHECK(from_ds.code == 0);
  CHECK(from_ds.output.find("6 x 6") != std::string::npos);

  CHECK(run_cli("render --dataset " + (dataset_dir() / "dataset.jsonl").string() +
                " --index 99").code == 2);

  const fs::path bad = scratch() / "level_bad.txt";
  spit(bad, "ZZ\nZZ\n");
  CHECK(run_cli("render --level " + bad.string()).code == 2);
}

TEST_CASE("simulate runs one match and can trace it") {
  const fs::path level = scratch() / "level_sim.txt";
  spit(level, "PGF\nGGG\nGGP\n");
  const CliResult quiet = run_cli("simulate --level " + level.string() + " --seed 3");
  CHECK(quiet.code == 0);
  CHECK(quiet.output.find("winner:") != std::string::npos);
  CHECK(quiet.output.find("food collected") != std::string::npos);

  const CliResult traced = run_cli("simulate --level " + level.string() + " --seed 3 --trace");
  CHECK(traced.code == 0);
  CHECK(traced.output.find("t=0") != std::string::npos);
  CHECK(line_count(traced.output) > line_count(quiet.output));

  const fs::path blocked = scratch() / "level_blocked.txt";
  spit(blocked, "PSP\n");
  CHECK(run_cli("simulate --level " + blocked.string()).code == 2);
}

TEST_CASE("calibrate emits the stability curve") {
  const fs::path dir = scratch() / "cal";
  const CliResult r = run_cli("calibrate --count 3 --n-max 6 --threshold 0.5 --seed 4 --out-dir " +
                              dir.string());
  REQUIRE_MESSAGE(r.code == 0, r.output);
  CHECK(r.output.find("chosen n = ") != std::string::npos);
  const std::string csv = slurp(dir / "calibration.csv");
  CHECK(csv.rfind("n,mu,sigma\n", 0) == 0);
  CHECK(line_count(csv) >= 2);
}

TEST_CASE("the train, balance, evaluate, analyze chain holds together") {
  const fs::path train_dir = scratch() / "train";
  const CliResult trained =
      run_cli("train --steps 128 --rollout 64 --minibatch 32 --epochs 2 --hidden 8" + kFastEnv +
              "--seed 5 --out-dir " + train_dir.string());
  REQUIRE_MESSAGE(trained.code == 0, trained.output);
  CHECK(trained.output.find("training swap-narrow") != std::string::npos);
  CHECK(trained.output.find("finished: 128 steps") != std::string::npos);
  const std::string curve = slurp(train_dir / "curve.csv");
  CHECK(curve.rfind("update,", 0) == 0);
  const fs::path ckpt = train_dir / "checkpoint.json";
  REQUIRE(fs::exists(ckpt));

  const std::string ds = (dataset_dir() / "dataset.jsonl").string();

  const fs::path bal_dir = scratch() / "bal";
  const CliResult balanced =
      run_cli("balance --checkpoint " + ckpt.string() + " --dataset " + ds + " --index 0" +
              kFastEnv + "--seed 6 --out-dir " + bal_dir.string());
  REQUIRE_MESSAGE(balanced.code == 0, balanced.output);
  CHECK(balanced.output.find("b = ") != std::string::npos);
  const nlohmann::json record = nlohmann::json::parse(slurp(bal_dir / "balance.json"));
  CHECK(record.contains("b0"));
  CHECK(record.contains("b_final"));
  CHECK(record.at("termination").is_string());

  // a narrow checkpoint cannot drive a wide environment
  CHECK(run_cli("balance --checkpoint " + ckpt.string() + " --dataset " + ds +
                " --repr swap-wide" + kFastEnv).code == 2);

  const fs::path eval_dir = scratch() / "eval";
  const CliResult evaluated =
      run_cli("evaluate --dataset " + ds + " --policy greedy --checkpoint " + ckpt.string() +
              kFastEnv + "--seed 7 --out-dir " + eval_dir.string());
  REQUIRE_MESSAGE(evaluated.code == 0, evaluated.output);
  const nlohmann::json report = nlohmann::json::parse(slurp(eval_dir / "report.json"));
  CHECK(report.at("total").get<int>() == 5);
  CHECK(line_count(slurp(eval_dir / "episodes.jsonl")) == 5);
  CHECK(slurp(eval_dir / "histogram.csv").rfind("center,before,after\n", 0) == 0);

  CHECK(run_cli("evaluate --dataset " + ds + " --policy greedy" + kFastEnv).code == 2);

  const fs::path never_dir = scratch() / "eval_never";
  const CliResult never = run_cli("evaluate --dataset " + ds + " --policy never" + kFastEnv +
                                  "--out-dir " + never_dir.string());
  REQUIRE_MESSAGE(never.code == 0, never.output);
  const nlohmann::json never_report = nlohmann::json::parse(slurp(never_dir / "report.json"));
  CHECK(never_report.at("balanced_pct").get<double>() == 0.0);

  const fs::path ana_dir = scratch() / "ana";
  const CliResult analyzed = run_cli("analyze --dataset " + ds + " --policy random" + kFastEnv +
                                     "--seed 8 --out-dir " + ana_dir.string());
  REQUIRE_MESSAGE(analyzed.code == 0, analyzed.output);
  const std::string freq = slurp(ana_dir / "swap_frequency.csv");
  CHECK(freq.rfind("pair,count_model,share_model,count_random,share_random,relative_difference\n",
                   0) == 0);
  CHECK(line_count(freq) == 11);
}

TEST_CASE("config files with unknown keys are rejected") {
  const fs::path ini = scratch() / "bad.ini";
  spit(ini, "nonsense=1\n");
  CHECK(run_cli("--config " + ini.string() + " generate --count 2 --n-sims 2 --out-dir " +
                (scratch() / "cfg_out").string()).code == 2);
}
