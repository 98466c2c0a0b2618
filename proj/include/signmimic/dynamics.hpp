#pragma once

#include <Eigen/Dense>
#include <vector>

#include "signmimic/error.hpp"
#include "signmimic/skeleton.hpp"

namespace signmimic {

struct MotionClip;

/// Joint-space state over the actuated DoFs of a model.
struct DynState {
  Eigen::VectorXd q;
  Eigen::VectorXd qdot;
  double time = 0.0;
};

struct ControlTarget {
  Eigen::VectorXd q_des;
  Eigen::VectorXd qdot_des;  // zero unless set
};

/// Per-DoF PD error kp (q - q_des) + kd (qdot - qdot_des).
/// Kept as an Eigen expression so callers can fuse it.
template <typename Kp, typename Kd, typename Q, typename Qd, typename QDes, typename QdDes>
auto pd_error(const Eigen::MatrixBase<Kp>& kp, const Eigen::MatrixBase<Kd>& kd,
              const Eigen::MatrixBase<Q>& q, const Eigen::MatrixBase<Qd>& qdot,
              const Eigen::MatrixBase<QDes>& q_des, const Eigen::MatrixBase<QdDes>& qdot_des) {
  return (kp.cwiseProduct(q - q_des) + kd.cwiseProduct(qdot - qdot_des)).eval();
}

/// Diagonal joint-space plant: per-DoF effective inertia, gains and limits.
struct JointDynamics {
  Eigen::VectorXd inertia, kp, kd, lower, upper;
  std::vector<std::string> dof_names;  // used in error messages

  static JointDynamics from_model(const SkeletonModel& model);
  int size() const { return static_cast<int>(inertia.size()); }
};

Eigen::VectorXd pd_error(const JointDynamics& plant, const DynState& state, const ControlTarget& target);

/// One integration step of length dt in (0, 0.05].
///
/// Stable PD: both gain terms are evaluated at the end of the step,
///   M (v' - v) / dt = -kp (q + dt v' - q_des) - kd (v' - v_des),
/// followed by the semi-implicit position update q' = q + dt v'. Positions
/// leaving the joint range are clamped and their velocity zeroed.
DynState step(const JointDynamics& plant, const DynState& state, const ControlTarget& target, double dt);

ControlTarget hold_target(const DynState& state);

/// Joint-space states reproducing a clip frame by frame. Velocities are
/// central differences (one-sided at the ends) at the clip's rate.
std::vector<DynState> rollout_kinematic(const SkeletonModel& model, const MotionClip& clip);

}  // namespace signmimic
