#include "tilebal/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tilebal {

namespace {

/// Loss and (optionally) its gradient over one minibatch. The clip rule: the
/// per-sample objective is max(-ratio*A, -clip(ratio)*A); whenever the
/// clipped branch wins the max, the ratio sits strictly outside the clip
/// interval, so that branch is locally constant and contributes no gradient.
LossTerms loss_impl(const PolicyNet& net, const PpoBatch& batch, const TrainConfig& cfg,
                    Eigen::VectorXd* grad) {
  const Eigen::Index batch_size = batch.obs.cols();
  if (batch_size == 0) throw std::invalid_argument("empty PPO batch");
  const size_t heads = net.config().action_sizes.size();
  if (batch.actions.size() != heads) throw std::invalid_argument("batch head count mismatch");

  const PolicyNet::Forward fwd = net.forward(batch.obs);

  std::vector<Eigen::MatrixXd> probs(heads), log_probs(heads);
  Eigen::MatrixXd head_entropy(heads, batch_size);  // H per (head, sample)
  Eigen::VectorXd new_logprob = Eigen::VectorXd::Zero(batch_size);
  for (size_t h = 0; h < heads; ++h) {
    log_probs[h] = log_softmax_columns(fwd.logits[h]);
    probs[h] = log_probs[h].array().exp();
    head_entropy.row(static_cast<Eigen::Index>(h)) =
        -(probs[h].array() * log_probs[h].array()).colwise().sum().matrix();
    for (Eigen::Index i = 0; i < batch_size; ++i) {
      new_logprob[i] += log_probs[h](batch.actions[h][static_cast<size_t>(i)], i);
    }
  }

  const Eigen::ArrayXd ratio = (new_logprob - batch.old_logprobs).array().exp();
  const Eigen::ArrayXd adv = batch.advantages.array();
  const Eigen::ArrayXd unclipped = -ratio * adv;
  const Eigen::ArrayXd clipped =
      -ratio.min(1.0 + cfg.clip_ratio).max(1.0 - cfg.clip_ratio) * adv;
  const Eigen::ArrayXd per_sample = unclipped.max(clipped);

  const Eigen::ArrayXd value_err =
      fwd.values.transpose().array() - batch.returns.array();

  LossTerms terms;
  terms.policy = per_sample.mean();
  terms.value = 0.5 * value_err.square().mean();
  terms.entropy = head_entropy.colwise().sum().mean();
  terms.clip_fraction =
      ((ratio - 1.0).abs() > cfg.clip_ratio).cast<double>().mean();
  terms.total =
      terms.policy + cfg.value_coef * terms.value - cfg.entropy_coef * terms.entropy;
  if (!grad) return terms;

  const double inv_b = 1.0 / static_cast<double>(batch_size);
  // d(policy)/d(new_logprob): -A*ratio on the unclipped branch, 0 otherwise.
  Eigen::ArrayXd dlogprob = -adv * ratio * inv_b;
  for (Eigen::Index i = 0; i < batch_size; ++i) {
    if (clipped[i] > unclipped[i]) dlogprob[i] = 0.0;
  }

  MlpParams grads = MlpParams::zeros(net.config());
  Eigen::MatrixXd dh2 = Eigen::MatrixXd::Zero(fwd.h2.rows(), batch_size);
  for (size_t h = 0; h < heads; ++h) {
    // policy term: dlogprob * (onehot - p); entropy term contributes
    // +coef/B * p .* (log p + H_h) per column (from -coef * dH/dlogits).
    Eigen::MatrixXd dlogits(probs[h].rows(), batch_size);
    for (Eigen::Index i = 0; i < batch_size; ++i) {
      dlogits.col(i) =
          (cfg.entropy_coef * inv_b) *
          (probs[h].col(i).array() *
           (log_probs[h].col(i).array() + head_entropy(static_cast<Eigen::Index>(h), i)))
              .matrix();
      dlogits.col(i) -= dlogprob[i] * probs[h].col(i);
      dlogits(batch.actions[h][static_cast<size_t>(i)], i) += dlogprob[i];
    }
    grads.head_w[h] = dlogits * fwd.h2.transpose();
    grads.head_b[h] = dlogits.rowwise().sum();
    dh2.noalias() += net.params().head_w[h].transpose() * dlogits;
  }

  const Eigen::RowVectorXd dvalues =
      (cfg.value_coef * inv_b * value_err).matrix().transpose();
  grads.value_w = dvalues * fwd.h2.transpose();
  grads.value_b = dvalues.sum();
  dh2.noalias() += net.params().value_w.transpose() * dvalues;

  const Eigen::MatrixXd dz2 = dh2.array() * (1.0 - fwd.h2.array().square());
  grads.w2 = dz2 * fwd.h1.transpose();
  grads.b2 = dz2.rowwise().sum();
  const Eigen::MatrixXd dh1 = net.params().w2.transpose() * dz2;
  const Eigen::MatrixXd dz1 = dh1.array() * (1.0 - fwd.h1.array().square());
  grads.w1 = dz1 * batch.obs.transpose();
  grads.b1 = dz1.rowwise().sum();

  *grad = PolicyNet::flatten(grads);
  return terms;
}

}  // namespace

void validate_train_config(const TrainConfig& cfg) {
  if (!(cfg.gamma > 0.0 && cfg.gamma <= 1.0)) throw std::invalid_argument("gamma in (0,1]");
  if (!(cfg.gae_lambda >= 0.0 && cfg.gae_lambda <= 1.0)) {
    throw std::invalid_argument("gae_lambda in [0,1]");
  }
  if (!(cfg.clip_ratio > 0.0)) throw std::invalid_argument("clip_ratio must be positive");
  if (!(cfg.learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
  if (cfg.rollout_length < 1) throw std::invalid_argument("rollout_length must be >= 1");
  if (cfg.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (cfg.minibatch_size < 1 || cfg.rollout_length % cfg.minibatch_size != 0) {
    throw std::invalid_argument("minibatch_size must divide rollout_length");
  }
  if (cfg.entropy_coef < 0.0 || cfg.value_coef < 0.0) {
    throw std::invalid_argument("loss coefficients must be >= 0");
  }
  if (cfg.total_steps < 1) throw std::invalid_argument("total_steps must be >= 1");
}

GaeResult compute_gae(const Eigen::VectorXd& rewards, const Eigen::VectorXd& values,
                      const std::vector<std::uint8_t>& dones, double gamma, double lambda) {
  const Eigen::Index steps = rewards.size();
  if (values.size() != steps + 1 || static_cast<Eigen::Index>(dones.size()) != steps) {
    throw std::invalid_argument("GAE input lengths disagree");
  }
  GaeResult out;
  out.advantages.resize(steps);
  double acc = 0.0;
  for (Eigen::Index t = steps - 1; t >= 0; --t) {
    const double nonterminal = dones[static_cast<size_t>(t)] ? 0.0 : 1.0;
    const double delta = rewards[t] + gamma * values[t + 1] * nonterminal - values[t];
    acc = delta + gamma * lambda * nonterminal * acc;
    out.advantages[t] = acc;
  }
  out.returns = out.advantages + values.head(steps);
  return out;
}

LossTerms ppo_loss(const PolicyNet& net, const PpoBatch& batch, const TrainConfig& cfg) {
  return loss_impl(net, batch, cfg, nullptr);
}

LossTerms ppo_loss_and_grad(const PolicyNet& net, const PpoBatch& batch,
                            const TrainConfig& cfg, Eigen::VectorXd& grad) {
  return loss_impl(net, batch, cfg, &grad);
}

Adam::Adam(int dim, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  m_ = Eigen::VectorXd::Zero(dim);
  v_ = Eigen::VectorXd::Zero(dim);
}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    throw std::invalid_argument("Adam dimension mismatch");
  }
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_.array() + (1.0 - beta2_) * grad.array().square();
  const double bias1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bias2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  params.array() -=
      lr_ * (m_.array() / bias1) / ((v_.array() / bias2).sqrt() + eps_);
}

UpdateStats ppo_update(PolicyNet& net, Adam& adam, const Trajectory& traj,
                       const TrainConfig& cfg, Rng& rng) {
  const Eigen::Index steps = traj.rewards.size();
  GaeResult gae = compute_gae(traj.rewards, traj.values, traj.dones, cfg.gamma, cfg.gae_lambda);

  // Normalize advantages once over the whole rollout.
  const double mean = gae.advantages.mean();
  const double sd = std::sqrt((gae.advantages.array() - mean).square().mean());
  Eigen::VectorXd norm_adv = (gae.advantages.array() - mean) / (sd + 1e-8);

  std::vector<Eigen::Index> order(static_cast<size_t>(steps));
  for (Eigen::Index i = 0; i < steps; ++i) order[static_cast<size_t>(i)] = i;

  const size_t heads = traj.actions.size();
  UpdateStats stats;
  int batches = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (size_t i = order.size(); i > 1; --i) {  // Fisher-Yates
      std::swap(order[i - 1], order[static_cast<size_t>(rng.uniform_u64(i))]);
    }
    for (Eigen::Index start = 0; start < steps; start += cfg.minibatch_size) {
      const Eigen::Index count = std::min<Eigen::Index>(cfg.minibatch_size, steps - start);
      PpoBatch batch;
      batch.obs.resize(traj.obs.rows(), count);
      batch.actions.assign(heads, std::vector<int>(static_cast<size_t>(count)));
      batch.old_logprobs.resize(count);
      batch.advantages.resize(count);
      batch.returns.resize(count);
      for (Eigen::Index k = 0; k < count; ++k) {
        const Eigen::Index src = order[static_cast<size_t>(start + k)];
        batch.obs.col(k) = traj.obs.col(src);
        for (size_t h = 0; h < heads; ++h) {
          batch.actions[h][static_cast<size_t>(k)] = traj.actions[h][static_cast<size_t>(src)];
        }
        batch.old_logprobs[k] = traj.logprobs[src];
        batch.advantages[k] = norm_adv[src];
        batch.returns[k] = gae.returns[src];
      }

      Eigen::VectorXd grad;
      const LossTerms terms = ppo_loss_and_grad(net, batch, cfg, grad);
      if (!std::isfinite(terms.total)) {
        std::ostringstream msg;
        msg << "non-finite PPO loss (policy " << terms.policy << ", value " << terms.value
            << ", entropy " << terms.entropy << ") at update step " << adam.steps_taken();
        throw std::runtime_error(msg.str());
      }
      Eigen::VectorXd theta = net.flat_params();
      adam.step(theta, grad);
      net.set_flat_params(theta);

      stats.policy_loss += terms.policy;
      stats.value_loss += terms.value;
      stats.entropy += terms.entropy;
      stats.clip_fraction += terms.clip_fraction;
      ++batches;
    }
  }
  stats.policy_loss /= batches;
  stats.value_loss /= batches;
  stats.entropy /= batches;
  stats.clip_fraction /= batches;
  return stats;
}

std::string curve_csv(const std::vector<UpdateStats>& curve) {
  std::ostringstream out;
  out.precision(17);
  out << "update,steps,mean_reward,policy_loss,value_loss,entropy,clip_fraction\n";
  for (const auto& row : curve) {
    out << row.update << ',' << row.steps << ',' << row.mean_episode_reward << ','
        << row.policy_loss << ',' << row.value_loss << ',' << row.entropy << ','
        << row.clip_fraction << '\n';
  }
  return out.str();
}

}  // namespace tilebal
