#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tilebal/obs.hpp"
#include "tilebal/rng.hpp"

// Policy/value network: a shared two-layer tanh trunk feeding one categorical
// logit head per action component plus a scalar value head. Multi-component
// actions factorize into independent categoricals, so the log-probability of
// an action is the sum of its component log-probabilities. All math is double
// precision so gradients can be checked against finite differences.

namespace tilebal {

struct PolicyConfig {
  int obs_len = 0;
  std::vector<int> action_sizes;  // cardinality per action component
  int hidden = 64;                // trunk width, two layers
};

void validate_policy_config(const PolicyConfig& cfg);

/// Raw parameters. The same struct doubles as the gradient accumulator.
struct MlpParams {
  Eigen::MatrixXd w1, w2;                // hidden x obs_len, hidden x hidden
  Eigen::VectorXd b1, b2;                // hidden
  std::vector<Eigen::MatrixXd> head_w;   // per head: size x hidden
  std::vector<Eigen::VectorXd> head_b;   // per head: size
  Eigen::RowVectorXd value_w;            // 1 x hidden
  double value_b = 0.0;

  static MlpParams zeros(const PolicyConfig& cfg);
  void add_scaled(const MlpParams& other, double scale);
};

/// Numerically stable column-wise softmax utilities shared with the trainer.
Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd& logits);
Eigen::MatrixXd log_softmax_columns(const Eigen::MatrixXd& logits);

class PolicyNet {
 public:
  /// Xavier-initialized trunk; logit heads start near zero so the initial
  /// policy is close to uniform. Deterministic in seed.
  PolicyNet(PolicyConfig cfg, std::uint64_t seed);

  /// All-zero parameters (uniform policy, value 0). Mostly for tests.
  explicit PolicyNet(PolicyConfig cfg);

  const PolicyConfig& config() const { return cfg_; }
  const MlpParams& params() const { return params_; }
  MlpParams& params() { return params_; }

  /// Batched forward pass over column-wise observations (obs_len x batch).
  /// Keeps the activations needed for backpropagation.
  struct Forward {
    std::vector<Eigen::MatrixXd> logits;  // per head: size x batch
    Eigen::RowVectorXd values;            // 1 x batch
    Eigen::MatrixXd h1, h2;               // hidden x batch activations
  };
  Forward forward(const Eigen::MatrixXd& obs) const;

  struct Sample {
    std::vector<int> action;  // one index per component
    double logprob = 0.0;     // sum over components
    double value = 0.0;
  };
  Sample sample(const Observation& obs, Rng& rng) const;

  /// Log-probability of a given action under the current policy, plus value.
  Sample score(const Observation& obs, const std::vector<int>& action) const;

  /// Per-component argmax; ties resolve to the lowest index.
  std::vector<int> act_greedy(const Observation& obs) const;

  double value(const Observation& obs) const;

  // Flat views in a fixed order (w1,b1,w2,b2,heads...,value) for the
  // optimizer and finite-difference checks.
  int param_count() const;
  Eigen::VectorXd flat_params() const;
  void set_flat_params(const Eigen::VectorXd& theta);
  static Eigen::VectorXd flatten(const MlpParams& params);

  /// Versioned JSON checkpoint; full double precision round-trip.
  std::string to_json() const;
  static PolicyNet from_json(const std::string& text);
  void save(const std::string& path) const;
  static PolicyNet load(const std::string& path);

 private:
  PolicyConfig cfg_;
  MlpParams params_;
};

}  // namespace tilebal
