#include "tilebal/policy.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace tilebal {

namespace {

/// Xavier-uniform fill, deterministic in the rng stream. `scale` shrinks the
/// logit heads toward zero so the untrained policy stays near uniform.
void fill_xavier(Eigen::Ref<Eigen::MatrixXd> m, Rng& rng, double scale = 1.0) {
  const double limit = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = scale * limit * (2.0 * rng.next_double() - 1.0);
    }
  }
}

void append(Eigen::VectorXd& out, Eigen::Index& at, const double* data, Eigen::Index n) {
  out.segment(at, n) = Eigen::Map<const Eigen::VectorXd>(data, n);
  at += n;
}

void extract(const Eigen::VectorXd& in, Eigen::Index& at, double* data, Eigen::Index n) {
  Eigen::Map<Eigen::VectorXd>(data, n) = in.segment(at, n);
  at += n;
}

int sample_categorical(const Eigen::VectorXd& probs, Rng& rng) {
  double u = rng.next_double();
  for (Eigen::Index k = 0; k < probs.size(); ++k) {
    u -= probs[k];
    if (u < 0.0) return static_cast<int>(k);
  }
  return static_cast<int>(probs.size() - 1);  // rounding slack
}

}  // namespace

void validate_policy_config(const PolicyConfig& cfg) {
  if (cfg.obs_len < 1) throw std::invalid_argument("obs_len must be >= 1");
  if (cfg.hidden < 1) throw std::invalid_argument("hidden width must be >= 1");
  if (cfg.action_sizes.empty()) throw std::invalid_argument("need at least one action head");
  for (const int s : cfg.action_sizes) {
    if (s < 1) throw std::invalid_argument("action component sizes must be >= 1");
  }
}

MlpParams MlpParams::zeros(const PolicyConfig& cfg) {
  MlpParams p;
  p.w1 = Eigen::MatrixXd::Zero(cfg.hidden, cfg.obs_len);
  p.b1 = Eigen::VectorXd::Zero(cfg.hidden);
  p.w2 = Eigen::MatrixXd::Zero(cfg.hidden, cfg.hidden);
  p.b2 = Eigen::VectorXd::Zero(cfg.hidden);
  for (const int s : cfg.action_sizes) {
    p.head_w.push_back(Eigen::MatrixXd::Zero(s, cfg.hidden));
    p.head_b.push_back(Eigen::VectorXd::Zero(s));
  }
  p.value_w = Eigen::RowVectorXd::Zero(cfg.hidden);
  p.value_b = 0.0;
  return p;
}

void MlpParams::add_scaled(const MlpParams& other, double scale) {
  w1 += scale * other.w1;
  b1 += scale * other.b1;
  w2 += scale * other.w2;
  b2 += scale * other.b2;
  for (size_t i = 0; i < head_w.size(); ++i) {
    head_w[i] += scale * other.head_w[i];
    head_b[i] += scale * other.head_b[i];
  }
  value_w += scale * other.value_w;
  value_b += scale * other.value_b;
}

Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out = logits;
  out.rowwise() -= logits.colwise().maxCoeff();
  out = out.array().exp();
  out.array().rowwise() /= out.colwise().sum().array();
  return out;
}

Eigen::MatrixXd log_softmax_columns(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd shifted = logits;
  shifted.rowwise() -= logits.colwise().maxCoeff();
  const Eigen::RowVectorXd log_z = shifted.array().exp().colwise().sum().log();
  shifted.rowwise() -= log_z;
  return shifted;
}

PolicyNet::PolicyNet(PolicyConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
  validate_policy_config(cfg_);
  params_ = MlpParams::zeros(cfg_);
  Rng rng(seed);
  fill_xavier(params_.w1, rng);
  fill_xavier(params_.w2, rng);
  for (auto& head : params_.head_w) fill_xavier(head, rng, 0.01);
  fill_xavier(params_.value_w, rng);
}

PolicyNet::PolicyNet(PolicyConfig cfg) : cfg_(std::move(cfg)) {
  validate_policy_config(cfg_);
  params_ = MlpParams::zeros(cfg_);
}

PolicyNet::Forward PolicyNet::forward(const Eigen::MatrixXd& obs) const {
  if (obs.rows() != cfg_.obs_len) {
    throw std::invalid_argument("observation length does not match policy input");
  }
  Forward out;
  out.h1 = ((params_.w1 * obs).colwise() + params_.b1).array().tanh();
  out.h2 = ((params_.w2 * out.h1).colwise() + params_.b2).array().tanh();
  out.logits.reserve(params_.head_w.size());
  for (size_t i = 0; i < params_.head_w.size(); ++i) {
    out.logits.push_back((params_.head_w[i] * out.h2).colwise() + params_.head_b[i]);
  }
  out.values = (params_.value_w * out.h2).array() + params_.value_b;
  return out;
}

PolicyNet::Sample PolicyNet::sample(const Observation& obs, Rng& rng) const {
  const Forward fwd = forward(obs);
  Sample out;
  out.value = fwd.values[0];
  for (const auto& logits : fwd.logits) {
    const Eigen::MatrixXd log_probs = log_softmax_columns(logits);
    const Eigen::VectorXd probs = log_probs.array().exp();
    const int a = sample_categorical(probs, rng);
    out.action.push_back(a);
    out.logprob += log_probs(a, 0);
  }
  return out;
}

PolicyNet::Sample PolicyNet::score(const Observation& obs, const std::vector<int>& action) const {
  if (action.size() != cfg_.action_sizes.size()) {
    throw std::invalid_argument("action has wrong number of components");
  }
  const Forward fwd = forward(obs);
  Sample out;
  out.action = action;
  out.value = fwd.values[0];
  for (size_t i = 0; i < fwd.logits.size(); ++i) {
    const Eigen::MatrixXd log_probs = log_softmax_columns(fwd.logits[i]);
    if (action[i] < 0 || action[i] >= cfg_.action_sizes[i]) {
      throw std::out_of_range("action component out of range");
    }
    out.logprob += log_probs(action[i], 0);
  }
  return out;
}

std::vector<int> PolicyNet::act_greedy(const Observation& obs) const {
  const Forward fwd = forward(obs);
  std::vector<int> action;
  action.reserve(fwd.logits.size());
  for (const auto& logits : fwd.logits) {
    int best = 0;
    for (Eigen::Index k = 1; k < logits.rows(); ++k) {
      if (logits(k, 0) > logits(best, 0)) best = static_cast<int>(k);
    }
    action.push_back(best);
  }
  return action;
}

double PolicyNet::value(const Observation& obs) const { return forward(obs).values[0]; }

int PolicyNet::param_count() const {
  int n = cfg_.hidden * cfg_.obs_len + cfg_.hidden;  // w1, b1
  n += cfg_.hidden * cfg_.hidden + cfg_.hidden;      // w2, b2
  for (const int s : cfg_.action_sizes) n += s * cfg_.hidden + s;
  n += cfg_.hidden + 1;  // value head
  return n;
}

Eigen::VectorXd PolicyNet::flatten(const MlpParams& p) {
  Eigen::Index total = p.w1.size() + p.b1.size() + p.w2.size() + p.b2.size();
  for (size_t i = 0; i < p.head_w.size(); ++i) total += p.head_w[i].size() + p.head_b[i].size();
  total += p.value_w.size() + 1;

  Eigen::VectorXd flat(total);
  Eigen::Index at = 0;
  append(flat, at, p.w1.data(), p.w1.size());
  append(flat, at, p.b1.data(), p.b1.size());
  append(flat, at, p.w2.data(), p.w2.size());
  append(flat, at, p.b2.data(), p.b2.size());
  for (size_t i = 0; i < p.head_w.size(); ++i) {
    append(flat, at, p.head_w[i].data(), p.head_w[i].size());
    append(flat, at, p.head_b[i].data(), p.head_b[i].size());
  }
  append(flat, at, p.value_w.data(), p.value_w.size());
  flat[at] = p.value_b;
  return flat;
}

Eigen::VectorXd PolicyNet::flat_params() const { return flatten(params_); }

void PolicyNet::set_flat_params(const Eigen::VectorXd& theta) {
  if (theta.size() != param_count()) {
    throw std::invalid_argument("flat parameter vector has wrong length");
  }
  Eigen::Index at = 0;
  extract(theta, at, params_.w1.data(), params_.w1.size());
  extract(theta, at, params_.b1.data(), params_.b1.size());
  extract(theta, at, params_.w2.data(), params_.w2.size());
  extract(theta, at, params_.b2.data(), params_.b2.size());
  for (size_t i = 0; i < params_.head_w.size(); ++i) {
    extract(theta, at, params_.head_w[i].data(), params_.head_w[i].size());
    extract(theta, at, params_.head_b[i].data(), params_.head_b[i].size());
  }
  extract(theta, at, params_.value_w.data(), params_.value_w.size());
  params_.value_b = theta[at];
}

std::string PolicyNet::to_json() const {
  nlohmann::json j;
  j["version"] = 1;
  j["obs_len"] = cfg_.obs_len;
  j["action_sizes"] = cfg_.action_sizes;
  j["hidden"] = cfg_.hidden;
  const Eigen::VectorXd flat = flat_params();
  j["params"] = std::vector<double>(flat.data(), flat.data() + flat.size());
  return j.dump();
}

PolicyNet PolicyNet::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (j.value("version", 0) != 1) throw std::runtime_error("unsupported checkpoint version");
  PolicyConfig cfg;
  cfg.obs_len = j.at("obs_len").get<int>();
  cfg.action_sizes = j.at("action_sizes").get<std::vector<int>>();
  cfg.hidden = j.at("hidden").get<int>();
  PolicyNet net(cfg);
  const auto values = j.at("params").get<std::vector<double>>();
  if (static_cast<int>(values.size()) != net.param_count()) {
    throw std::runtime_error("checkpoint parameter count mismatch");
  }
  net.set_flat_params(Eigen::Map<const Eigen::VectorXd>(values.data(),
                                                        static_cast<Eigen::Index>(values.size())));
  return net;
}

void PolicyNet::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << to_json() << "\n";
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

PolicyNet PolicyNet::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str());
}

}  // namespace tilebal
