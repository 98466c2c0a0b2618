#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <vector>

#include "signmimic/io.hpp"
#include "signmimic/mlp.hpp"
#include "signmimic/policy.hpp"

namespace signmimic {

enum class AdvantageMode { paper, gae };

struct TrainConfig {
  std::vector<int> hidden{256, 512, 256};
  Activation activation = Activation::relu;
  double log_std = -3.0;
  double output_scale = 1e-2;
  double learning_rate = 3e-6;
  int n_steps = 512;  // per environment
  int batch_size = 128;
  int n_epochs = 5;
  double gamma = 0.95;
  double clip_ratio = 0.2;
  double gae_lambda = 0.95;
  AdvantageMode advantage_mode = AdvantageMode::paper;
  bool normalize_advantages = true;
  double value_coef = 0.5;
  long total_steps = 500000;
  int num_envs = 8;
  std::uint64_t seed = 1;
  int checkpoint_every = 10;  // updates

  void validate() const;
  long steps_per_update() const { return static_cast<long>(n_steps) * num_envs; }
  long num_updates() const { return total_steps / steps_per_update(); }
};

Json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const Json& j, const TrainConfig& base = {});

/// Rollout storage, time-major: sample (t, e) lives at t * num_envs + e.
struct RolloutBuffer {
  int n_steps = 0;
  int num_envs = 0;
  Eigen::MatrixXd observations;  // obs_dim x size
  Eigen::MatrixXd actions;       // action_dim x size
  Eigen::VectorXd rewards;
  Eigen::VectorXd values;
  Eigen::VectorXd log_probs;
  std::vector<char> dones;       // episode ended after this step
  std::vector<char> terminated;  // ended by early stop; no bootstrap
  Eigen::VectorXd truncation_values;  // V(final observation) where done and not terminated
  Eigen::VectorXd last_values;        // per env, V(observation) after the last step

  void allocate(int steps, int envs, int obs_dim, int action_dim);
  Eigen::Index index(int t, int e) const { return static_cast<Eigen::Index>(t) * num_envs + e; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(n_steps) * num_envs; }
};

struct Advantages {
  Eigen::VectorXd returns;
  Eigen::VectorXd advantages;
};

/// paper: R_t is the discounted reward-to-go inside the episode, bootstrapped
/// at truncation and at the end of the rollout; A_t = R_t - V(s_t).
/// gae: lambda-weighted TD advantages, R_t = A_t + V(s_t).
Advantages returns_and_advantages(const RolloutBuffer& buffer, double gamma, AdvantageMode mode,
                                  double lambda = 0.95, bool normalize = false);

/// Shifts to zero mean and scales to unit (population) variance.
void normalize_in_place(Eigen::VectorXd& x);

struct Minibatch {
  Eigen::MatrixXd observations;
  Eigen::MatrixXd actions;
  Eigen::VectorXd old_log_probs;
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;
};

struct LossTerms {
  double surrogate_loss = 0.0;  // negated clipped objective
  double value_loss = 0.0;      // mean squared error to the returns
  double kl = 0.0;
  double clip_fraction = 0.0;
  double total = 0.0;           // surrogate_loss + value_coef * value_loss
};

struct LossGradient {
  LossTerms terms;
  Mlp policy_grad;
  Mlp value_grad;
};

/// Loss and its analytic gradient. log_std is a constant and gets no gradient.
LossGradient ppo_loss(const ActorCritic& params, const Minibatch& batch, double clip_ratio, double value_coef);

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, AdamState& state, double lr);

Json to_json(const AdamState& s);
AdamState adam_from_json(const Json& j);

/// Policy parameters followed by value parameters.
Eigen::VectorXd flatten(const ActorCritic& ac);
void unflatten(ActorCritic& ac, const Eigen::VectorXd& params);

struct UpdateStats {
  double surrogate_loss = 0.0;
  double value_loss = 0.0;
  double kl = 0.0;
  double clip_fraction = 0.0;
};

/// n_epochs passes over shuffled minibatches. Stats are minibatch averages.
/// Throws NumericError naming the layer when a gradient is not finite; the
/// parameters are left as they were before that minibatch.
UpdateStats ppo_update(ActorCritic& params, AdamState& optimizer, const RolloutBuffer& buffer,
                       const Advantages& adv, const TrainConfig& config, std::mt19937_64& rng);

Minibatch gather(const RolloutBuffer& buffer, const Advantages& adv, const std::vector<Eigen::Index>& indices);

std::string to_string(AdvantageMode m);
AdvantageMode advantage_mode_from_string(const std::string& s);

}  // namespace signmimic
