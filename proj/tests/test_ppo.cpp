#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "corridor_env.hpp"
#include "tilebal/policy.hpp"
#include "tilebal/ppo.hpp"
#include "tilebal/rng.hpp"

using namespace tilebal;

namespace {

PolicyConfig tiny_config() {
  PolicyConfig cfg;
  cfg.obs_len = 5;
  cfg.action_sizes = {3, 2};
  cfg.hidden = 4;
  return cfg;
}

/// A random but self-consistent minibatch: actions are valid indices and
/// old_logprobs come from the net shifted down by a cycled entry of
/// `logprob_shifts`, so the ratio of sample i is exp(shift).
PpoBatch make_batch(const PolicyNet& net, int batch_size, Rng& rng,
                    const std::vector<double>& logprob_shifts) {
  const PolicyConfig& cfg = net.config();
  PpoBatch batch;
  batch.obs.resize(cfg.obs_len, batch_size);
  batch.actions.assign(cfg.action_sizes.size(), std::vector<int>(static_cast<size_t>(batch_size)));
  batch.old_logprobs.resize(batch_size);
  batch.advantages.resize(batch_size);
  batch.returns.resize(batch_size);
  for (int i = 0; i < batch_size; ++i) {
    for (int r = 0; r < cfg.obs_len; ++r) batch.obs(r, i) = 2.0 * rng.next_double() - 1.0;
    std::vector<int> action;
    for (size_t h = 0; h < cfg.action_sizes.size(); ++h) {
      const int a = rng.uniform_int(cfg.action_sizes[h]);
      batch.actions[h][static_cast<size_t>(i)] = a;
      action.push_back(a);
    }
    const PolicyNet::Sample scored = net.score(batch.obs.col(i), action);
    batch.old_logprobs[i] = scored.logprob - logprob_shifts[static_cast<size_t>(i) %
                                                            logprob_shifts.size()];
    double adv = 2.0 * rng.next_double() - 1.0;
    if (std::abs(adv) < 0.1) adv = adv < 0.0 ? -0.1 : 0.1;  // keep kinks away
    batch.advantages[i] = adv;
    batch.returns[i] = 2.0 * rng.next_double() - 1.0;
  }
  return batch;
}

/// Brute-force GAE: for each t, walk the remaining deltas with an explicit
/// weight, cutting at episode ends. O(T^2) but independent of the recursion.
Eigen::VectorXd gae_by_double_sum(const Eigen::VectorXd& rewards,
                                  const Eigen::VectorXd& values,
                                  const std::vector<std::uint8_t>& dones, double gamma,
                                  double lambda) {
  const Eigen::Index steps = rewards.size();
  Eigen::VectorXd advantages(steps);
  for (Eigen::Index t = 0; t < steps; ++t) {
    double acc = 0.0;
    double weight = 1.0;
    for (Eigen::Index l = t; l < steps; ++l) {
      const double nonterminal = dones[static_cast<size_t>(l)] ? 0.0 : 1.0;
      const double delta = rewards[l] + gamma * values[l + 1] * nonterminal - values[l];
      acc += weight * delta;
      if (dones[static_cast<size_t>(l)]) break;
      weight *= gamma * lambda;
    }
    advantages[t] = acc;
  }
  return advantages;
}

}  // namespace

TEST_CASE("train config validation") {
  CHECK_NOTHROW(validate_train_config(TrainConfig{}));
  auto broken = [](auto mutate) {
    TrainConfig cfg;
    mutate(cfg);
    return cfg;
  };
  CHECK_THROWS_AS(validate_train_config(broken([](TrainConfig& c) { c.gamma = 0.0; })),
                  std::invalid_argument);
  CHECK_THROWS_AS(validate_train_config(broken([](TrainConfig& c) { c.gamma = 1.1; })),
                  std::invalid_argument);
  CHECK_NOTHROW(validate_train_config(broken([](TrainConfig& c) { c.gae_lambda = 1.0; })));
  CHECK_THROWS_AS(validate_train_config(broken([](TrainConfig& c) { c.gae_lambda = -0.1; })),
                  std::invalid_argument);
  CHECK_THROWS_AS(validate_train_config(broken([](TrainConfig& c) { c.clip_ratio = 0.0; })),
                  std::invalid_argument);
  CHECK_THROWS_AS(validate_train_config(broken([](TrainConfig& c) { c.learning_rate = 0.0; })),
                  std::invalid_argument);
  CHECK_THROWS_AS(validate_train_config(broken([](TrainConfig& c) { c.rollout_length = 0; })),
                  std::invalid_argument);
  CHECK_THROWS_AS(validate_train_config(broken([](TrainConfig& c) { c.epochs = 0; })),
                  std::invalid_argument);
  CHECK_THROWS_AS(validate_train_config(broken([](TrainConfig& c) { c.minibatch_size = 0; })),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      validate_train_config(broken([](TrainConfig& c) { c.minibatch_size = 96; })),
      std::invalid_argument);  // 256 % 96 != 0
  CHECK_THROWS_AS(validate_train_config(broken([](TrainConfig& c) { c.entropy_coef = -1.0; })),
                  std::invalid_argument);
  CHECK_THROWS_AS(validate_train_config(broken([](TrainConfig& c) { c.value_coef = -1.0; })),
                  std::invalid_argument);
  CHECK_THROWS_AS(validate_train_config(broken([](TrainConfig& c) { c.total_steps = 0; })),
                  std::invalid_argument);
}

TEST_CASE("gae hand-computed values") {
  SUBCASE("a terminal step drops the bootstrap value") {
    Eigen::VectorXd rewards(1), values(2);
    rewards << 2.0;
    values << 1.0, 99.0;
    const GaeResult out = compute_gae(rewards, values, {1}, 0.5, 0.5);
    CHECK(out.advantages[0] == 1.0);
    CHECK(out.returns[0] == 2.0);
  }

  SUBCASE("two live steps fold the recursion once") {
    Eigen::VectorXd rewards(2), values(3);
    rewards << 1.0, 1.0;
    values << 0.5, 0.25, 0.125;
    const GaeResult out = compute_gae(rewards, values, {0, 0}, 0.5, 0.5);
    // delta_1 = 1 + 0.5*0.125 - 0.25 = 0.8125
    // delta_0 = 1 + 0.5*0.25 - 0.5 = 0.625; A_0 = 0.625 + 0.25*0.8125
    CHECK(out.advantages[1] == 0.8125);
    CHECK(out.advantages[0] == 0.828125);
    CHECK(out.returns[0] == 1.328125);
    CHECK(out.returns[1] == 1.0625);
  }

  SUBCASE("an episode boundary stops the propagation") {
    Eigen::VectorXd rewards(2), values(3);
    rewards << 1.0, 5.0;
    values << 0.25, 0.5, 0.75;
    const GaeResult out = compute_gae(rewards, values, {1, 0}, 0.5, 0.5);
    CHECK(out.advantages[0] == 0.75);  // 1 - 0.25, nothing leaks across
    CHECK(out.advantages[1] == 4.875);
  }

  SUBCASE("gamma = lambda = 1 sums raw deltas") {
    Eigen::VectorXd rewards(3), values(4);
    rewards << 1.0, 1.0, 1.0;
    values << 0.0, 0.0, 0.0, 0.5;
    const GaeResult out = compute_gae(rewards, values, {0, 0, 0}, 1.0, 1.0);
    CHECK(out.advantages[0] == 3.5);
    CHECK(out.advantages[1] == 2.5);
    CHECK(out.advantages[2] == 1.5);
  }

  Eigen::VectorXd rewards(2), values(2);
  CHECK_THROWS_AS(compute_gae(rewards, values, {0, 0}, 0.9, 0.9), std::invalid_argument);
  Eigen::VectorXd values3(3);
  CHECK_THROWS_AS(compute_gae(rewards, values3, {0}, 0.9, 0.9), std::invalid_argument);
}

TEST_CASE("gae recursion matches the explicit double sum") {
  Rng rng(404);
  for (int trial = 0; trial < 30; ++trial) {
    const int steps = 1 + rng.uniform_int(50);
    Eigen::VectorXd rewards(steps), values(steps + 1);
    std::vector<std::uint8_t> dones(static_cast<size_t>(steps));
    for (int t = 0; t < steps; ++t) {
      rewards[t] = 2.0 * rng.next_double() - 1.0;
      values[t] = 2.0 * rng.next_double() - 1.0;
      dones[static_cast<size_t>(t)] = rng.bernoulli(0.2) ? 1 : 0;
    }
    values[steps] = 2.0 * rng.next_double() - 1.0;
    const double gamma = 0.9 + 0.1 * rng.next_double();
    const double lambda = 0.8 + 0.2 * rng.next_double();

    const GaeResult out = compute_gae(rewards, values, dones, gamma, lambda);
    const Eigen::VectorXd brute = gae_by_double_sum(rewards, values, dones, gamma, lambda);
    for (int t = 0; t < steps; ++t) {
      CHECK(std::abs(out.advantages[t] - brute[t]) <= 1e-10);
      CHECK(out.returns[t] == out.advantages[t] + values[t]);
    }
  }
}

TEST_CASE("loss terms match a per-sample reimplementation") {
  const PolicyNet net(tiny_config(), 21);
  TrainConfig cfg;
  Rng rng(5);
  const PpoBatch batch = make_batch(net, 6, rng, {-0.3, -0.1, 0.0, 0.1, 0.3});
  const LossTerms terms = ppo_loss(net, batch, cfg);

  double policy = 0.0, value = 0.0, entropy = 0.0, clipped_count = 0.0;
  for (int i = 0; i < 6; ++i) {
    std::vector<int> action;
    for (const auto& head : batch.actions) action.push_back(head[static_cast<size_t>(i)]);
    const PolicyNet::Sample scored = net.score(batch.obs.col(i), action);
    const double ratio = std::exp(scored.logprob - batch.old_logprobs[i]);
    const double lo = 1.0 - cfg.clip_ratio, hi = 1.0 + cfg.clip_ratio;
    const double clamped = ratio < lo ? lo : (ratio > hi ? hi : ratio);
    const double a = batch.advantages[i];
    policy += std::max(-ratio * a, -clamped * a);
    value += 0.5 * (scored.value - batch.returns[i]) * (scored.value - batch.returns[i]);
    if (std::abs(ratio - 1.0) > cfg.clip_ratio) clipped_count += 1.0;

    const PolicyNet::Forward fwd = net.forward(batch.obs.col(i));
    for (const auto& logits : fwd.logits) {
      const Eigen::MatrixXd log_probs = log_softmax_columns(logits);
      for (Eigen::Index k = 0; k < log_probs.rows(); ++k) {
        entropy -= std::exp(log_probs(k, 0)) * log_probs(k, 0);
      }
    }
  }
  policy /= 6.0;
  value /= 6.0;
  entropy /= 6.0;

  CHECK(std::abs(terms.policy - policy) <= 1e-12);
  CHECK(std::abs(terms.value - value) <= 1e-12);
  CHECK(std::abs(terms.entropy - entropy) <= 1e-12);
  CHECK(terms.clip_fraction == clipped_count / 6.0);
  CHECK(std::abs(terms.total - (policy + cfg.value_coef * value -
                                cfg.entropy_coef * entropy)) <= 1e-12);
}

TEST_CASE("loss rejects malformed batches") {
  const PolicyNet net(tiny_config(), 2);
  TrainConfig cfg;
  PpoBatch empty;
  empty.obs.resize(5, 0);
  empty.actions.assign(2, {});
  CHECK_THROWS_AS(ppo_loss(net, empty, cfg), std::invalid_argument);

  Rng rng(6);
  PpoBatch wrong = make_batch(net, 2, rng, {0.0});
  wrong.actions.pop_back();
  CHECK_THROWS_AS(ppo_loss(net, wrong, cfg), std::invalid_argument);
}

TEST_CASE("analytic gradient matches central finite differences") {
  PolicyConfig pcfg;
  pcfg.obs_len = 7;
  pcfg.action_sizes = {3, 2};
  pcfg.hidden = 6;
  TrainConfig cfg;
  const double eps = 1e-5;

  for (std::uint64_t trial = 0; trial < 3; ++trial) {
    PolicyNet net(pcfg, 100 + trial);
    Rng rng(200 + trial);
    const PpoBatch batch = make_batch(net, 8, rng, {-0.3, -0.1, 0.0, 0.1, 0.3});

    Eigen::VectorXd grad;
    ppo_loss_and_grad(net, batch, cfg, grad);
    REQUIRE(grad.size() == net.param_count());

    const Eigen::VectorXd theta = net.flat_params();
    double worst = 0.0;
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
      Eigen::VectorXd probe = theta;
      probe[k] = theta[k] + eps;
      net.set_flat_params(probe);
      const double up = ppo_loss(net, batch, cfg).total;
      probe[k] = theta[k] - eps;
      net.set_flat_params(probe);
      const double down = ppo_loss(net, batch, cfg).total;
      net.set_flat_params(theta);

      const double fd = (up - down) / (2.0 * eps);
      const double rel =
          std::abs(grad[k] - fd) / std::max(1e-6, std::abs(grad[k]) + std::abs(fd));
      worst = std::max(worst, rel);
    }
    CAPTURE(trial);
    CHECK(worst <= 1e-4);
  }
}

TEST_CASE("clipped samples contribute no policy gradient") {
  const PolicyNet net(tiny_config(), 33);
  TrainConfig cfg;
  cfg.value_coef = 0.0;
  cfg.entropy_coef = 0.0;

  Rng rng(7);
  PpoBatch batch = make_batch(net, 4, rng, {0.0});
  // force every ratio to exp(1), far outside the clip window, with A > 0
  for (int i = 0; i < 4; ++i) {
    batch.old_logprobs[i] -= 1.0;
    batch.advantages[i] = 1.0;
  }

  Eigen::VectorXd grad;
  const LossTerms terms = ppo_loss_and_grad(net, batch, cfg, grad);
  CHECK(std::abs(terms.policy - -(1.0 + cfg.clip_ratio)) <= 1e-12);
  CHECK(terms.clip_fraction == 1.0);
  CHECK(grad.norm() == 0.0);
}

TEST_CASE("unit ratios leave the surrogate at minus mean advantage") {
  const PolicyNet net(tiny_config(), 34);
  TrainConfig cfg;
  Rng rng(8);
  const PpoBatch batch = make_batch(net, 8, rng, {0.0});  // old == new
  const LossTerms terms = ppo_loss(net, batch, cfg);
  CHECK(std::abs(terms.policy - -batch.advantages.mean()) <= 1e-12);
  CHECK(terms.clip_fraction == 0.0);
}

TEST_CASE("entropy of a zero net is the sum of uniform head entropies") {
  const PolicyNet net(tiny_config());
  TrainConfig cfg;
  Rng rng(9);
  const PpoBatch batch = make_batch(net, 4, rng, {0.0});
  const LossTerms terms = ppo_loss(net, batch, cfg);
  CHECK(terms.entropy == doctest::Approx(std::log(3.0) + std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("adam takes near-sign steps and counts them") {
  Adam adam(3, 0.1);
  Eigen::VectorXd params = Eigen::VectorXd::Zero(3);
  Eigen::VectorXd grad(3);
  grad << 1.0, -2.0, 0.5;

  adam.step(params, grad);
  CHECK(adam.steps_taken() == 1);
  CHECK(std::abs(params[0] - -0.1) <= 1e-7);
  CHECK(std::abs(params[1] - 0.1) <= 1e-7);
  CHECK(std::abs(params[2] - -0.1) <= 1e-7);

  // a constant gradient keeps the bias-corrected step at the same size
  adam.step(params, grad);
  CHECK(adam.steps_taken() == 2);
  CHECK(std::abs(params[0] - -0.2) <= 1e-6);
  CHECK(std::abs(params[1] - 0.2) <= 1e-6);

  Eigen::VectorXd short_params = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(adam.step(short_params, grad), std::invalid_argument);
}

TEST_CASE("ppo_update is deterministic and rejects non-finite rewards") {
  PolicyConfig pcfg;
  pcfg.obs_len = 3;
  pcfg.action_sizes = {2};
  pcfg.hidden = 4;
  TrainConfig cfg;
  cfg.rollout_length = 8;
  cfg.minibatch_size = 4;
  cfg.epochs = 2;

  Trajectory traj;
  const int T = 8;
  traj.obs.resize(3, T);
  traj.actions.assign(1, std::vector<int>(T));
  traj.logprobs.resize(T);
  traj.rewards.resize(T);
  traj.values.resize(T + 1);
  traj.dones.assign(T, 0);
  Rng fill(10);
  PolicyNet reference(pcfg, 11);
  for (int t = 0; t < T; ++t) {
    Observation obs(3);
    for (int r = 0; r < 3; ++r) obs[r] = 2.0 * fill.next_double() - 1.0;
    traj.obs.col(t) = obs;
    const auto sample = reference.sample(obs, fill);
    traj.actions[0][static_cast<size_t>(t)] = sample.action[0];
    traj.logprobs[t] = sample.logprob;
    traj.values[t] = sample.value;
    traj.rewards[t] = 2.0 * fill.next_double() - 1.0;
    traj.dones[static_cast<size_t>(t)] = t == 5 ? 1 : 0;
  }
  traj.values[T] = 0.25;

  PolicyNet net_a(pcfg, 11), net_b(pcfg, 11);
  Adam adam_a(net_a.param_count(), cfg.learning_rate);
  Adam adam_b(net_b.param_count(), cfg.learning_rate);
  Rng rng_a(12), rng_b(12);
  const UpdateStats stats_a = ppo_update(net_a, adam_a, traj, cfg, rng_a);
  const UpdateStats stats_b = ppo_update(net_b, adam_b, traj, cfg, rng_b);
  CHECK((net_a.flat_params().array() == net_b.flat_params().array()).all());
  CHECK(stats_a.policy_loss == stats_b.policy_loss);
  CHECK(stats_a.value_loss == stats_b.value_loss);
  CHECK(stats_a.entropy == stats_b.entropy);
  CHECK(stats_a.clip_fraction == stats_b.clip_fraction);

  Trajectory broken = traj;
  broken.rewards[2] = std::numeric_limits<double>::infinity();
  PolicyNet net_c(pcfg, 11);
  Adam adam_c(net_c.param_count(), cfg.learning_rate);
  Rng rng_c(12);
  CHECK_THROWS_AS(ppo_update(net_c, adam_c, broken, cfg, rng_c), std::runtime_error);
}

TEST_CASE("training solves the corridor") {
  TrainConfig cfg;
  cfg.total_steps = 10000;
  cfg.rollout_length = 128;
  cfg.minibatch_size = 32;
  cfg.epochs = 4;
  cfg.learning_rate = 3e-3;
  cfg.entropy_coef = 0.01;
  cfg.seed = 3;

  PolicyConfig pcfg;
  pcfg.obs_len = CorridorEnv{}.obs_len();
  pcfg.action_sizes = CorridorEnv{}.action_sizes();
  pcfg.hidden = 16;

  CorridorEnv env;
  PolicyNet net(pcfg, derive_seed(cfg.seed, 7));
  const TrainResult result = train(env, net, cfg);
  CHECK(result.steps == 79 * 128);  // first multiple of 128 past total_steps
  CHECK(result.curve.size() == 79);
  CHECK(result.episodes > 100);

  // the greedy policy must walk straight to the goal
  CorridorEnv probe;
  Observation obs = probe.reset();
  double ret = 0.0;
  for (int t = 0; t < CorridorEnv::kMaxSteps; ++t) {
    const auto step = probe.step(net.act_greedy(obs));
    ret += step.reward;
    obs = step.obs;
    if (step.done) break;
  }
  CHECK(ret == doctest::Approx(CorridorEnv::kOptimalReturn).epsilon(1e-9));
  CHECK(result.curve.back().mean_episode_reward > 0.9);

  // bitwise reproducible from the same seeds
  CorridorEnv env2;
  PolicyNet net2(pcfg, derive_seed(cfg.seed, 7));
  const TrainResult result2 = train(env2, net2, cfg);
  CHECK((net2.flat_params().array() == net.flat_params().array()).all());
  CHECK(curve_csv(result2.curve) == curve_csv(result.curve));

  PolicyNet mismatched(PolicyConfig{6, {2}, 16}, 1);
  CHECK_THROWS_AS(train(env, mismatched, cfg), std::invalid_argument);
}

TEST_CASE("curve csv shape") {
  std::vector<UpdateStats> curve(2);
  curve[0].update = 1;
  curve[0].steps = 128;
  curve[1].update = 2;
  curve[1].steps = 256;
  const std::string csv = curve_csv(curve);
  CHECK(csv.rfind("update,steps,mean_reward,policy_loss,value_loss,entropy,clip_fraction\n",
                  0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(csv.find("\n1,128,") != std::string::npos);
  CHECK(csv.find("\n2,256,") != std::string::npos);
}
