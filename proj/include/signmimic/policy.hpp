#pragma once

#include <Eigen/Dense>
#include <random>

#include "signmimic/io.hpp"
#include "signmimic/mlp.hpp"

namespace signmimic {

/// Diagonal Gaussian policy with a network mean and a constant log_std.
struct GaussianPolicy {
  Mlp mean;
  Eigen::VectorXd log_std;
};

struct ActorCritic {
  GaussianPolicy policy;
  Mlp value;  // output size 1
};

struct PolicyOutput {
  Eigen::MatrixXd mean;    // action_dim x batch
  Eigen::VectorXd log_std;
  Eigen::MatrixXd action;  // equals mean when no rng is given
  Eigen::VectorXd log_prob;
};

/// Observations are columns. With `rng == nullptr` the policy is deterministic.
/// Noise is drawn column by column, dimension by dimension.
PolicyOutput policy_forward(const GaussianPolicy& policy, const Eigen::MatrixXd& obs, std::mt19937_64* rng);

/// Sum over dimensions of the Normal(mean, exp(log_std)) log-density, per column.
Eigen::VectorXd gaussian_log_prob(const Eigen::MatrixXd& mean, const Eigen::VectorXd& log_std,
                                  const Eigen::MatrixXd& action);

ActorCritic make_actor_critic(int obs_dim, int action_dim, const std::vector<int>& hidden, Activation activation,
                              double log_std, double output_scale, std::mt19937_64& rng);

/// Value estimates, one per column.
Eigen::VectorXd value_forward(const Mlp& value, const Eigen::MatrixXd& obs);

Json to_json(const ActorCritic& ac);
ActorCritic actor_critic_from_json(const Json& j);

}  // namespace signmimic
