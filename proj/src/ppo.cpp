#include "signmimic/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "signmimic/error.hpp"

namespace signmimic {

void TrainConfig::validate() const {
  if (hidden.empty()) throw ConfigError("train.hidden: need at least one hidden layer");
  for (int h : hidden) {
    if (h <= 0) throw ConfigError("train.hidden: sizes must be positive");
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("train.learning_rate must be > 0");
  if (n_steps <= 0) throw ConfigError("train.n_steps must be > 0");
  if (num_envs <= 0) throw ConfigError("train.num_envs must be > 0");
  if (batch_size <= 0 || batch_size > steps_per_update()) {
    throw ConfigError("train.batch_size must lie in [1, n_steps * num_envs]");
  }
  if (n_epochs <= 0) throw ConfigError("train.n_epochs must be > 0");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("train.gamma must lie in (0, 1]");
  if (!(clip_ratio > 0.0)) throw ConfigError("train.clip_ratio must be > 0");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) throw ConfigError("train.gae_lambda must lie in [0, 1]");
  if (!(value_coef >= 0.0)) throw ConfigError("train.value_coef must be >= 0");
  if (!std::isfinite(log_std)) throw ConfigError("train.log_std must be finite");
  if (!(output_scale > 0.0)) throw ConfigError("train.output_scale must be > 0");
  if (total_steps < steps_per_update()) throw ConfigError("train.total_steps must cover at least one update");
  if (checkpoint_every <= 0) throw ConfigError("train.checkpoint_every must be > 0");
}

std::string to_string(AdvantageMode m) { return m == AdvantageMode::paper ? "paper" : "gae"; }

AdvantageMode advantage_mode_from_string(const std::string& s) {
  if (s == "paper") return AdvantageMode::paper;
  if (s == "gae") return AdvantageMode::gae;
  throw ConfigError("train.advantage_mode: expected paper or gae, got '" + s + "'");
}

Json to_json(const TrainConfig& c) {
  Json j;
  j["hidden"] = c.hidden;
  j["activation"] = to_string(c.activation);
  j["log_std"] = c.log_std;
  j["output_scale"] = c.output_scale;
  j["learning_rate"] = c.learning_rate;
  j["n_steps"] = c.n_steps;
  j["batch_size"] = c.batch_size;
  j["n_epochs"] = c.n_epochs;
  j["gamma"] = c.gamma;
  j["clip_ratio"] = c.clip_ratio;
  j["gae_lambda"] = c.gae_lambda;
  j["advantage_mode"] = to_string(c.advantage_mode);
  j["normalize_advantages"] = c.normalize_advantages;
  j["value_coef"] = c.value_coef;
  j["total_steps"] = c.total_steps;
  j["num_envs"] = c.num_envs;
  j["seed"] = c.seed;
  j["checkpoint_every"] = c.checkpoint_every;
  return j;
}

TrainConfig train_config_from_json(const Json& j, const TrainConfig& base) {
  if (!j.is_object()) throw ConfigError("train: expected object");
  TrainConfig c = base;
  try {
    if (j.contains("hidden")) c.hidden = j["hidden"].get<std::vector<int>>();
    if (j.contains("activation")) c.activation = activation_from_string(j["activation"].get<std::string>());
    if (j.contains("log_std")) c.log_std = j["log_std"].get<double>();
    if (j.contains("output_scale")) c.output_scale = j["output_scale"].get<double>();
    if (j.contains("learning_rate")) c.learning_rate = j["learning_rate"].get<double>();
    if (j.contains("n_steps")) c.n_steps = j["n_steps"].get<int>();
    if (j.contains("batch_size")) c.batch_size = j["batch_size"].get<int>();
    if (j.contains("n_epochs")) c.n_epochs = j["n_epochs"].get<int>();
    if (j.contains("gamma")) c.gamma = j["gamma"].get<double>();
    if (j.contains("clip_ratio")) c.clip_ratio = j["clip_ratio"].get<double>();
    if (j.contains("gae_lambda")) c.gae_lambda = j["gae_lambda"].get<double>();
    if (j.contains("advantage_mode")) c.advantage_mode = advantage_mode_from_string(j["advantage_mode"].get<std::string>());
    if (j.contains("normalize_advantages")) c.normalize_advantages = j["normalize_advantages"].get<bool>();
    if (j.contains("value_coef")) c.value_coef = j["value_coef"].get<double>();
    if (j.contains("total_steps")) c.total_steps = j["total_steps"].get<long>();
    if (j.contains("num_envs")) c.num_envs = j["num_envs"].get<int>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("checkpoint_every")) c.checkpoint_every = j["checkpoint_every"].get<int>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("train: ") + e.what());
  }
  return c;
}

void RolloutBuffer::allocate(int steps, int envs, int obs_dim, int action_dim) {
  n_steps = steps;
  num_envs = envs;
  const Eigen::Index n = size();
  observations.resize(obs_dim, n);
  actions.resize(action_dim, n);
  rewards = Eigen::VectorXd::Zero(n);
  values = Eigen::VectorXd::Zero(n);
  log_probs = Eigen::VectorXd::Zero(n);
  dones.assign(n, 0);
  terminated.assign(n, 0);
  truncation_values = Eigen::VectorXd::Zero(n);
  last_values = Eigen::VectorXd::Zero(envs);
}

void normalize_in_place(Eigen::VectorXd& x) {
  if (x.size() == 0) return;
  const double mean = x.mean();
  x.array() -= mean;
  const double std = std::sqrt(x.squaredNorm() / static_cast<double>(x.size()));
  x /= std + 1e-8;
}

Advantages returns_and_advantages(const RolloutBuffer& b, double gamma, AdvantageMode mode, double lambda,
                                  bool normalize) {
  if (b.rewards.size() != b.size() || b.values.size() != b.size() || b.last_values.size() != b.num_envs ||
      static_cast<Eigen::Index>(b.dones.size()) != b.size()) {
    throw ContractError("returns_and_advantages: buffer arrays have inconsistent lengths");
  }
  Advantages out;
  out.returns.resize(b.size());
  out.advantages.resize(b.size());
  for (int e = 0; e < b.num_envs; ++e) {
    double next_return = b.last_values(e);
    double next_value = b.last_values(e);
    double next_adv = 0.0;
    for (int t = b.n_steps - 1; t >= 0; --t) {
      const Eigen::Index i = b.index(t, e);
      const double bootstrap = b.terminated[i] ? 0.0 : b.truncation_values(i);
      if (mode == AdvantageMode::paper) {
        const double r = b.rewards(i) + gamma * (b.dones[i] ? bootstrap : next_return);
        out.returns(i) = r;
        out.advantages(i) = r - b.values(i);
        next_return = r;
      } else {
        const double delta = b.rewards(i) + gamma * (b.dones[i] ? bootstrap : next_value) - b.values(i);
        const double a = delta + gamma * lambda * (b.dones[i] ? 0.0 : next_adv);
        out.advantages(i) = a;
        out.returns(i) = a + b.values(i);
        next_adv = a;
        next_value = b.values(i);
      }
    }
  }
  if (normalize) normalize_in_place(out.advantages);
  return out;
}

LossGradient ppo_loss(const ActorCritic& params, const Minibatch& batch, double clip_ratio, double value_coef) {
  const Eigen::Index n = batch.observations.cols();
  if (n == 0) throw ContractError("ppo_loss: empty minibatch");
  const double inv_n = 1.0 / static_cast<double>(n);

  MlpTape policy_tape;
  const Eigen::MatrixXd mean = forward(params.policy.mean, batch.observations, policy_tape);
  const Eigen::VectorXd log_prob = gaussian_log_prob(mean, params.policy.log_std, batch.actions);
  const Eigen::ArrayXd inv_var = (-2.0 * params.policy.log_std.array()).exp();

  LossGradient out;
  Eigen::MatrixXd grad_mean(mean.rows(), n);
  double objective = 0.0;
  double kl = 0.0;
  double clipped = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double log_ratio = log_prob(i) - batch.old_log_probs(i);
    const double ratio = std::exp(log_ratio);
    const double a = batch.advantages(i);
    const double unclipped = ratio * a;
    const double clipped_term = std::clamp(ratio, 1.0 - clip_ratio, 1.0 + clip_ratio) * a;
    objective += std::min(unclipped, clipped_term);
    kl += (ratio - 1.0) - log_ratio;
    if (std::abs(ratio - 1.0) > clip_ratio) clipped += 1.0;
    // d(objective)/d(mean) is nonzero only where the unclipped branch is selected.
    // Written so a NaN advantage propagates instead of selecting the zero branch.
    const double g = clipped_term < unclipped ? 0.0 : a * ratio;
    grad_mean.col(i) = (-inv_n * g) * ((batch.actions.col(i) - mean.col(i)).array() * inv_var).matrix();
  }
  out.policy_grad = backward(params.policy.mean, policy_tape, grad_mean);

  MlpTape value_tape;
  const Eigen::MatrixXd v = forward(params.value, batch.observations, value_tape);
  const Eigen::RowVectorXd diff = v.row(0) - batch.returns.transpose();
  out.value_grad = backward(params.value, value_tape, (2.0 * value_coef * inv_n) * diff);

  out.terms.surrogate_loss = -objective * inv_n;
  out.terms.value_loss = diff.squaredNorm() * inv_n;
  out.terms.kl = kl * inv_n;
  out.terms.clip_fraction = clipped * inv_n;
  out.terms.total = out.terms.surrogate_loss + value_coef * out.terms.value_loss;
  return out;
}

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, AdamState& s, double lr) {
  if (s.m.size() != params.size()) {
    s.m = Eigen::VectorXd::Zero(params.size());
    s.v = Eigen::VectorXd::Zero(params.size());
    s.t = 0;
  }
  ++s.t;
  s.m = s.beta1 * s.m + (1.0 - s.beta1) * grad;
  s.v = s.beta2 * s.v + (1.0 - s.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.t));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.t));
  params.array() -= lr * (s.m.array() / c1) / ((s.v.array() / c2).sqrt() + s.eps);
}

Json to_json(const AdamState& s) {
  return {{"m", to_json(s.m)}, {"v", to_json(s.v)}, {"t", s.t},
          {"beta1", s.beta1},  {"beta2", s.beta2}, {"eps", s.eps}};
}

AdamState adam_from_json(const Json& j) {
  AdamState s;
  s.m = vector_from_json(j.at("m"), "adam.m");
  s.v = vector_from_json(j.at("v"), "adam.v");
  s.t = j.at("t").get<long>();
  s.beta1 = j.at("beta1").get<double>();
  s.beta2 = j.at("beta2").get<double>();
  s.eps = j.at("eps").get<double>();
  if (s.m.size() != s.v.size()) throw ParseError("adam: moment sizes differ");
  return s;
}

Eigen::VectorXd flatten(const ActorCritic& ac) {
  const Eigen::VectorXd p = flatten(ac.policy.mean);
  const Eigen::VectorXd v = flatten(ac.value);
  Eigen::VectorXd out(p.size() + v.size());
  out << p, v;
  return out;
}

void unflatten(ActorCritic& ac, const Eigen::VectorXd& params) {
  const Eigen::Index np = ac.policy.mean.num_parameters();
  if (params.size() != np + ac.value.num_parameters()) throw ContractError("unflatten: parameter count mismatch");
  unflatten(ac.policy.mean, params.head(np));
  unflatten(ac.value, params.tail(params.size() - np));
}

namespace {

void check_finite(const Mlp& grad, const char* net) {
  for (std::size_t k = 0; k < grad.layers.size(); ++k) {
    if (!grad.layers[k].weight.allFinite()) {
      throw NumericError(std::string("non-finite gradient in ") + net + ".layers[" + std::to_string(k) + "].weight");
    }
    if (!grad.layers[k].bias.allFinite()) {
      throw NumericError(std::string("non-finite gradient in ") + net + ".layers[" + std::to_string(k) + "].bias");
    }
  }
}

}  // namespace

Minibatch gather(const RolloutBuffer& b, const Advantages& adv, const std::vector<Eigen::Index>& idx) {
  const auto n = static_cast<Eigen::Index>(idx.size());
  Minibatch mb;
  mb.observations.resize(b.observations.rows(), n);
  mb.actions.resize(b.actions.rows(), n);
  mb.old_log_probs.resize(n);
  mb.advantages.resize(n);
  mb.returns.resize(n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const Eigen::Index i = idx[c];
    mb.observations.col(c) = b.observations.col(i);
    mb.actions.col(c) = b.actions.col(i);
    mb.old_log_probs(c) = b.log_probs(i);
    mb.advantages(c) = adv.advantages(i);
    mb.returns(c) = adv.returns(i);
  }
  return mb;
}

UpdateStats ppo_update(ActorCritic& params, AdamState& optimizer, const RolloutBuffer& buffer,
                       const Advantages& adv, const TrainConfig& config, std::mt19937_64& rng) {
  const Eigen::Index n = buffer.size();
  std::vector<Eigen::Index> order(n);
  UpdateStats stats;
  int count = 0;
  Eigen::VectorXd flat = flatten(params);
  for (int epoch = 0; epoch < config.n_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (Eigen::Index start = 0; start < n; start += config.batch_size) {
      const Eigen::Index end = std::min<Eigen::Index>(n, start + config.batch_size);
      const std::vector<Eigen::Index> idx(order.begin() + start, order.begin() + end);
      const LossGradient lg = ppo_loss(params, gather(buffer, adv, idx), config.clip_ratio, config.value_coef);
      check_finite(lg.policy_grad, "policy");
      check_finite(lg.value_grad, "value");
      ActorCritic grad_shape{{lg.policy_grad, params.policy.log_std}, lg.value_grad};
      adam_step(flat, flatten(grad_shape), optimizer, config.learning_rate);
      unflatten(params, flat);
      stats.surrogate_loss += lg.terms.surrogate_loss;
      stats.value_loss += lg.terms.value_loss;
      stats.kl += lg.terms.kl;
      stats.clip_fraction += lg.terms.clip_fraction;
      ++count;
    }
  }
  if (!flat.allFinite()) throw NumericError("ppo_update: parameters became non-finite");
  stats.surrogate_loss /= count;
  stats.value_loss /= count;
  stats.kl /= count;
  stats.clip_fraction /= count;
  return stats;
}

}  // namespace signmimic
