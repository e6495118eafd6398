#pragma once

#include <cstdint>
#include <deque>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tilebal/policy.hpp"
#include "tilebal/rng.hpp"

// Clipped-surrogate policy optimization, written out by hand: generalized
// advantage estimation, the clipped ratio objective with entropy bonus and
// value regression, analytic backpropagation through the policy net, and
// Adam. Everything is deterministic given (seed, config) and the gradients
// are exact enough to pass a central finite-difference check.
//
// The trainer drives any environment with this shape:
//
//   std::vector<int> action_sizes() const;
//   int obs_len() const;
//   Observation reset();                       // begins a fresh episode
//   struct Step { Observation obs; double reward; bool done; };
//   Step step(const std::vector<int>& action);

namespace tilebal {

struct TrainConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_ratio = 0.2;
  double learning_rate = 2.5e-4;
  int rollout_length = 256;
  int epochs = 4;
  int minibatch_size = 64;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  long total_steps = 50000;
  std::uint64_t seed = 0;
};

void validate_train_config(const TrainConfig& cfg);

/// One rollout buffer. values carries T+1 entries: the bootstrap value of the
/// observation after the last step sits at the end (ignored when that step
/// terminated).
struct Trajectory {
  Eigen::MatrixXd obs;                    // obs_len x T, column per step
  std::vector<std::vector<int>> actions;  // per head, length T
  Eigen::VectorXd logprobs;               // T, summed over heads
  Eigen::VectorXd rewards;                // T
  Eigen::VectorXd values;                 // T + 1
  std::vector<std::uint8_t> dones;        // T
};

struct GaeResult {
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;  // advantages + values
};

/// delta_t = r_t + gamma*(1-done_t)*V_{t+1} - V_t folded backwards:
/// A_t = delta_t + gamma*lambda*(1-done_t)*A_{t+1}.
GaeResult compute_gae(const Eigen::VectorXd& rewards, const Eigen::VectorXd& values,
                      const std::vector<std::uint8_t>& dones, double gamma, double lambda);

/// Minibatch view consumed by the loss.
struct PpoBatch {
  Eigen::MatrixXd obs;                    // obs_len x B
  std::vector<std::vector<int>> actions;  // per head, length B
  Eigen::VectorXd old_logprobs;           // B
  Eigen::VectorXd advantages;             // B, already normalized
  Eigen::VectorXd returns;                // B
};

struct LossTerms {
  double total = 0.0;    // policy + value_coef*value - entropy_coef*entropy
  double policy = 0.0;   // mean max(-ratio*A, -clip(ratio)*A)
  double value = 0.0;    // 0.5 * mean squared value error
  double entropy = 0.0;  // mean summed head entropy
  double clip_fraction = 0.0;
};

LossTerms ppo_loss(const PolicyNet& net, const PpoBatch& batch, const TrainConfig& cfg);

/// Same loss, plus d(total)/d(params) in PolicyNet::flatten order.
LossTerms ppo_loss_and_grad(const PolicyNet& net, const PpoBatch& batch,
                            const TrainConfig& cfg, Eigen::VectorXd& grad);

class Adam {
 public:
  Adam(int dim, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);
  long steps_taken() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  Eigen::VectorXd m_, v_;
};

struct UpdateStats {
  int update = 0;
  long steps = 0;
  double mean_episode_reward = 0.0;  // over recent finished episodes
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
};

/// Runs cfg.epochs passes of shuffled minibatches over the rollout.
/// Advantages are normalized once across the whole rollout. Throws on a
/// non-finite loss instead of applying a broken update.
UpdateStats ppo_update(PolicyNet& net, Adam& adam, const Trajectory& traj,
                       const TrainConfig& cfg, Rng& rng);

/// "update,steps,mean_reward,policy_loss,value_loss,entropy,clip_fraction".
std::string curve_csv(const std::vector<UpdateStats>& curve);

struct TrainResult {
  std::vector<UpdateStats> curve;  // one row per update
  long steps = 0;
  int episodes = 0;
};

/// Rollout/update loop until total_steps environment steps. The env is reset
/// once at the start and after every terminal step; episodes may span rollout
/// boundaries (truncated tails bootstrap from the value head).
template <class Env>
TrainResult train(Env& env, PolicyNet& net, const TrainConfig& cfg,
                  std::ostream* progress = nullptr) {
  validate_train_config(cfg);
  const std::vector<int> sizes = env.action_sizes();
  if (sizes != net.config().action_sizes || env.obs_len() != net.config().obs_len) {
    throw std::invalid_argument("policy shape does not match environment");
  }
  Rng sample_rng(derive_seed(cfg.seed, 0));
  Rng update_rng(derive_seed(cfg.seed, 1));
  Adam adam(net.param_count(), cfg.learning_rate);

  TrainResult result;
  const int T = cfg.rollout_length;
  const size_t heads = sizes.size();
  Observation obs = env.reset();
  double episode_reward = 0.0;
  std::deque<double> recent;  // returns of the last finished episodes

  while (result.steps < cfg.total_steps) {
    Trajectory traj;
    traj.obs.resize(net.config().obs_len, T);
    traj.actions.assign(heads, std::vector<int>(static_cast<size_t>(T)));
    traj.logprobs.resize(T);
    traj.rewards.resize(T);
    traj.values.resize(T + 1);
    traj.dones.assign(static_cast<size_t>(T), 0);

    for (int t = 0; t < T; ++t) {
      const PolicyNet::Sample choice = net.sample(obs, sample_rng);
      traj.obs.col(t) = obs;
      for (size_t h = 0; h < heads; ++h) traj.actions[h][static_cast<size_t>(t)] = choice.action[h];
      traj.logprobs[t] = choice.logprob;
      traj.values[t] = choice.value;

      auto step = env.step(choice.action);
      traj.rewards[t] = step.reward;
      traj.dones[static_cast<size_t>(t)] = step.done ? 1 : 0;
      episode_reward += step.reward;
      if (step.done) {
        recent.push_back(episode_reward);
        if (recent.size() > 50) recent.pop_front();
        ++result.episodes;
        episode_reward = 0.0;
        obs = env.reset();
      } else {
        obs = std::move(step.obs);
      }
    }
    traj.values[T] = net.value(obs);

    UpdateStats stats = ppo_update(net, adam, traj, cfg, update_rng);
    result.steps += T;
    stats.update = static_cast<int>(result.curve.size()) + 1;
    stats.steps = result.steps;
    if (!recent.empty()) {
      double sum = 0.0;
      for (const double r : recent) sum += r;
      stats.mean_episode_reward = sum / static_cast<double>(recent.size());
    }
    result.curve.push_back(stats);
    if (progress) {
      *progress << "update " << stats.update << "  steps " << stats.steps
                << "  mean_reward " << stats.mean_episode_reward << "  entropy "
                << stats.entropy << "\n";
    }
  }
  return result;
}

}  // namespace tilebal
