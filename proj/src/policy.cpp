#include "signmimic/policy.hpp"

#include <cmath>
#include <numbers>

#include "signmimic/error.hpp"

namespace signmimic {

Eigen::VectorXd gaussian_log_prob(const Eigen::MatrixXd& mean, const Eigen::VectorXd& log_std,
                                  const Eigen::MatrixXd& action) {
  if (mean.rows() != log_std.size() || action.rows() != mean.rows() || action.cols() != mean.cols()) {
    throw ContractError("gaussian_log_prob: shape mismatch");
  }
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  const Eigen::ArrayXd inv_std = (-log_std.array()).exp();
  const double norm = log_std.sum() + half_log_2pi * static_cast<double>(log_std.size());
  Eigen::VectorXd out(mean.cols());
  for (Eigen::Index c = 0; c < mean.cols(); ++c) {
    const Eigen::ArrayXd z = (action.col(c) - mean.col(c)).array() * inv_std;
    out(c) = -0.5 * z.square().sum() - norm;
  }
  return out;
}

PolicyOutput policy_forward(const GaussianPolicy& policy, const Eigen::MatrixXd& obs, std::mt19937_64* rng) {
  PolicyOutput out;
  out.mean = forward(policy.mean, obs);
  out.log_std = policy.log_std;
  if (rng == nullptr) {
    out.action = out.mean;
  } else {
    const Eigen::VectorXd std = policy.log_std.array().exp();
    out.action.resize(out.mean.rows(), out.mean.cols());
    for (Eigen::Index c = 0; c < out.mean.cols(); ++c) {
      for (Eigen::Index r = 0; r < out.mean.rows(); ++r) {
        out.action(r, c) = out.mean(r, c) + std(r) * std::normal_distribution<double>{}(*rng);
      }
    }
  }
  out.log_prob = gaussian_log_prob(out.mean, out.log_std, out.action);
  return out;
}

ActorCritic make_actor_critic(int obs_dim, int action_dim, const std::vector<int>& hidden, Activation activation,
                              double log_std, double output_scale, std::mt19937_64& rng) {
  std::vector<int> sizes{obs_dim};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  ActorCritic ac;
  sizes.push_back(action_dim);
  ac.policy.mean = make_mlp(sizes, activation, output_scale, rng);
  ac.policy.log_std = Eigen::VectorXd::Constant(action_dim, log_std);
  sizes.back() = 1;
  ac.value = make_mlp(sizes, activation, 1.0, rng);
  return ac;
}

Eigen::VectorXd value_forward(const Mlp& value, const Eigen::MatrixXd& obs) {
  return forward(value, obs).row(0).transpose();
}

Json to_json(const ActorCritic& ac) {
  Json j;
  j["policy"] = to_json(ac.policy.mean);
  j["log_std"] = to_json(ac.policy.log_std);
  j["value"] = to_json(ac.value);
  return j;
}

ActorCritic actor_critic_from_json(const Json& j) {
  ActorCritic ac;
  ac.policy.mean = mlp_from_json(j.at("policy"));
  ac.policy.log_std = vector_from_json(j.at("log_std"), "log_std");
  ac.value = mlp_from_json(j.at("value"));
  if (ac.policy.log_std.size() != ac.policy.mean.output_size()) throw ParseError("log_std size does not match policy");
  if (ac.value.output_size() != 1) throw ParseError("value network must have one output");
  if (ac.value.input_size() != ac.policy.mean.input_size()) throw ParseError("value/policy input sizes differ");
  return ac;
}

}  // namespace signmimic
