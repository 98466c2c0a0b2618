#pragma once

#include <random>

#include "signmimic/ppo.hpp"
#include "support/oracles.hpp"

namespace oracle {

struct GradientCheck {
  double max_relative_error = 0.0;
  double max_abs_gradient = 0.0;
};

// One random point: a 4-8-2 Gaussian policy with a 4-8-1 value network, a
// 16-sample minibatch whose probability ratios stay clear of the clip edges,
// and central differences of the total PPO loss over every parameter.
inline GradientCheck ppo_gradient_check(std::uint64_t seed, signmimic::Activation act, double floor = 1e-6) {
  using namespace signmimic;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ActorCritic ac;
  ac.policy.mean = make_mlp({4, 8, 2}, act, 1.0, rng);
  ac.value = make_mlp({4, 8, 1}, act, 1.0, rng);
  ac.policy.log_std = Eigen::VectorXd::Constant(2, -0.5);
  // Orthogonal init leaves biases at zero; move away from that.
  Eigen::VectorXd theta = flatten(ac);
  for (Eigen::Index i = 0; i < theta.size(); ++i) theta(i) += 0.3 * n(rng);
  unflatten(ac, theta);

  const int batch = 16;
  Minibatch mb;
  mb.observations = Eigen::MatrixXd(4, batch);
  mb.actions = Eigen::MatrixXd(2, batch);
  for (Eigen::Index i = 0; i < mb.observations.size(); ++i) mb.observations(i) = n(rng);
  const Eigen::MatrixXd mean = forward(ac.policy.mean, mb.observations);
  for (Eigen::Index i = 0; i < mb.actions.size(); ++i) mb.actions(i) = mean(i) + 0.6 * n(rng);
  const Eigen::VectorXd lp = gaussian_log_prob(mean, ac.policy.log_std, mb.actions);
  mb.old_log_probs.resize(batch);
  mb.advantages.resize(batch);
  mb.returns.resize(batch);
  const double clip = 0.2;
  for (int i = 0; i < batch; ++i) {
    // |log ratio| in [0, 0.1] (inside) or [0.3, 0.5] (clipped for one sign of A).
    const double mag = i % 2 ? 0.1 * std::abs(u(rng)) : 0.3 + 0.2 * std::abs(u(rng));
    mb.old_log_probs(i) = lp(i) - (u(rng) < 0 ? -mag : mag);
    mb.advantages(i) = n(rng);
    mb.returns(i) = n(rng);
  }

  const LossGradient lg = ppo_loss(ac, mb, clip, 0.5);
  ActorCritic shape{{lg.policy_grad, ac.policy.log_std}, lg.value_grad};
  const Eigen::VectorXd analytic = flatten(shape);
  const Eigen::VectorXd x0 = flatten(ac);
  auto loss = [&](const Eigen::VectorXd& x) {
    ActorCritic probe = ac;
    unflatten(probe, x);
    return ppo_loss(probe, mb, clip, 0.5).terms.total;
  };
  const Eigen::VectorXd numeric = central_difference(loss, x0, 1e-6);
  return {max_relative_error(analytic, numeric, floor), analytic.cwiseAbs().maxCoeff()};
}

}  // namespace oracle
