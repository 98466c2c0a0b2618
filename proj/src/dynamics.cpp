#include "signmimic/dynamics.hpp"

#include <cmath>

#include "signmimic/motion.hpp"

namespace signmimic {

JointDynamics JointDynamics::from_model(const SkeletonModel& model) {
  JointDynamics plant;
  plant.inertia = model.inertia;
  plant.kp = model.kp;
  plant.kd = model.kd;
  plant.lower = model.lower;
  plant.upper = model.upper;
  plant.dof_names.reserve(model.total_dofs);
  for (int d = 0; d < model.total_dofs; ++d) {
    const int j = model.dof_joint[d];
    plant.dof_names.push_back(model.joints[j].name + "[" + std::to_string(d - model.dof_index[j]) + "]");
  }
  return plant;
}

namespace {

void check_dims(const JointDynamics& plant, const DynState& state, const ControlTarget& target) {
  const Eigen::Index n = plant.size();
  if (state.q.size() != n || state.qdot.size() != n || target.q_des.size() != n ||
      (target.qdot_des.size() != 0 && target.qdot_des.size() != n)) {
    throw ContractError("dynamics: state/target dimension does not match plant");
  }
}

}  // namespace

Eigen::VectorXd pd_error(const JointDynamics& plant, const DynState& state, const ControlTarget& target) {
  check_dims(plant, state, target);
  if (target.qdot_des.size() == 0) {
    return pd_error(plant.kp, plant.kd, state.q, state.qdot, target.q_des, Eigen::VectorXd::Zero(plant.size()));
  }
  return pd_error(plant.kp, plant.kd, state.q, state.qdot, target.q_des, target.qdot_des);
}

DynState step(const JointDynamics& plant, const DynState& state, const ControlTarget& target, double dt) {
  if (!(dt > 0.0 && dt <= 0.05)) throw ContractError("step: dt must lie in (0, 0.05]");
  check_dims(plant, state, target);
  const Eigen::Index n = plant.size();

  DynState next;
  next.q.resize(n);
  next.qdot.resize(n);
  next.time = state.time + dt;
  const bool has_vel = target.qdot_des.size() == n;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = plant.inertia(i);
    const double kp = plant.kp(i);
    const double kd = plant.kd(i);
    const double vdes = has_vel ? target.qdot_des(i) : 0.0;
    const double v = (m * state.qdot(i) - dt * kp * (state.q(i) - target.q_des(i)) + dt * kd * vdes) /
                     (m + dt * kd + dt * dt * kp);
    double q = state.q(i) + dt * v;
    double qd = v;
    if (q < plant.lower(i)) {
      q = plant.lower(i);
      qd = 0.0;
    } else if (q > plant.upper(i)) {
      q = plant.upper(i);
      qd = 0.0;
    }
    if (!std::isfinite(q) || !std::isfinite(qd)) {
      const std::string name = i < static_cast<Eigen::Index>(plant.dof_names.size())
                                   ? plant.dof_names[i]
                                   : "dof " + std::to_string(i);
      throw InstabilityError("step: non-finite state at " + name);
    }
    next.q(i) = q;
    next.qdot(i) = qd;
  }
  return next;
}

ControlTarget hold_target(const DynState& state) {
  return {state.q, Eigen::VectorXd::Zero(state.q.size())};
}

std::vector<DynState> rollout_kinematic(const SkeletonModel& model, const MotionClip& clip) {
  if (clip.frames.size() < 2) throw ContractError("rollout_kinematic: clip needs at least 2 frames");
  const std::size_t n = clip.frames.size();
  std::vector<Eigen::VectorXd> coords;
  coords.reserve(n);
  for (const auto& frame : clip.frames) {
    if (frame.rotations.size() != model.joints.size()) {
      throw ContractError("rollout_kinematic: clip does not match model");
    }
    coords.push_back(coordinates_from_pose(model, frame));
  }
  const double dt = 1.0 / clip.rate;
  std::vector<DynState> states(n);
  for (std::size_t i = 0; i < n; ++i) {
    states[i].q = coords[i];
    states[i].time = static_cast<double>(i) * dt;
    if (i == 0) {
      states[i].qdot = (coords[1] - coords[0]) / dt;
    } else if (i + 1 == n) {
      states[i].qdot = (coords[n - 1] - coords[n - 2]) / dt;
    } else {
      states[i].qdot = (coords[i + 1] - coords[i - 1]) / (2.0 * dt);
    }
  }
  return states;
}

}  // namespace signmimic
