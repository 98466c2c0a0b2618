#include "signmimic/reward.hpp"

#include <cmath>
#include <set>

#include "signmimic/error.hpp"

namespace signmimic {

RewardConfig default_factor_config() {
  RewardConfig c;
  c.k_pb = 2.0;
  c.k_ph = 2.0;
  c.k_vb = 0.1;
  c.k_vh = 0.1;
  return c;
}

namespace {

std::vector<int> lookup(const SkeletonModel& model, const std::vector<std::string>& names, const char* what) {
  std::vector<int> out;
  out.reserve(names.size());
  for (const auto& n : names) {
    const int j = model.joint_index(n);
    if (j < 0) throw ContractError(std::string(what) + ": unknown joint '" + n + "'");
    out.push_back(j);
  }
  return out;
}

}  // namespace

RewardSets resolve(const RewardConfig& config, const SkeletonModel& model) {
  for (double k : {config.k_pb, config.k_ph, config.k_vb, config.k_vh, config.k_e, config.k_r}) {
    if (!(k >= 0.0) || !std::isfinite(k)) throw ConfigError("reward: scaling factors must be finite and >= 0");
  }
  const bool use_model = config.body_joints.empty() && config.hand_joints.empty();
  RewardSets sets;
  sets.body = lookup(model, use_model ? model.groups.body : config.body_joints, "reward.body_joints");
  sets.hand = lookup(model, use_model ? model.groups.hand : config.hand_joints, "reward.hand_joints");
  sets.end_effectors = lookup(
      model, config.end_effectors.empty() ? model.groups.end_effectors : config.end_effectors, "reward.end_effectors");

  std::set<int> body(sets.body.begin(), sets.body.end());
  std::set<int> covered = body;
  for (int j : sets.hand) {
    if (body.count(j)) throw ConfigError("reward: joint '" + model.joints[j].name + "' is in both body and hand sets");
    covered.insert(j);
  }
  for (int j = 0; j < model.num_joints(); ++j) {
    if (model.actuated(j) && !covered.count(j)) {
      throw ConfigError("reward: actuated joint '" + model.joints[j].name + "' is in neither body nor hand set");
    }
  }
  return sets;
}

double pose_error(const SkeletonModel& model, const PoseD& sim, const PoseD& ref, const std::vector<int>& joints) {
  if (sim.rotations.size() != model.joints.size() || ref.rotations.size() != model.joints.size()) {
    throw ContractError("pose_error: pose does not match model");
  }
  double sum = 0.0;
  for (int j : joints) {
    if (j < 0 || j >= model.num_joints()) throw ContractError("pose_error: joint index out of range");
    switch (model.joints[j].type) {
      case JointType::spherical: {
        const double a = quat_geodesic(sim.rotations[j], ref.rotations[j]);
        sum += a * a;
        break;
      }
      case JointType::revolute: {
        const double d = sim.angles[j] - ref.angles[j];
        sum += d * d;
        break;
      }
      case JointType::fixed:
        break;
    }
  }
  return sum;
}

double pose_error(const SkeletonModel& model, const PoseD& sim, const PoseD& ref,
                  const std::vector<std::string>& joints) {
  return pose_error(model, sim, ref, lookup(model, joints, "pose_error"));
}

double velocity_error(const SkeletonModel& model, const Eigen::VectorXd& sim_qdot, const Eigen::VectorXd& ref_qdot,
                      const std::vector<int>& joints) {
  if (sim_qdot.size() != model.total_dofs || ref_qdot.size() != model.total_dofs) {
    throw ContractError("velocity_error: velocity vector does not match model DoFs");
  }
  double sum = 0.0;
  for (int j : joints) {
    const int d = model.dof_index[j];
    if (d < 0) continue;
    const int n = dof_count(model.joints[j].type);
    sum += (sim_qdot.segment(d, n) - ref_qdot.segment(d, n)).squaredNorm();
  }
  return sum;
}

double end_effector_error(const SkeletonModel& model, const PoseD& sim, const PoseD& ref,
                          const std::vector<int>& end_effectors) {
  if (end_effectors.empty()) return 0.0;
  const auto fs = forward_kinematics(model, sim);
  const auto fr = forward_kinematics(model, ref);
  double sum = 0.0;
  for (int j : end_effectors) {
    const int link = model.joints[j].child_link;
    sum += (fs[link].position - fr[link].position).squaredNorm();
  }
  return sum;
}

double end_effector_error(const SkeletonModel& model, const PoseD& sim, const PoseD& ref) {
  if (model.groups.end_effectors.empty()) throw ContractError("end_effector_error: model declares no end effectors");
  return end_effector_error(model, sim, ref, lookup(model, model.groups.end_effectors, "end_effector_error"));
}

double root_error(const PoseD& sim, const PoseD& ref) {
  const double a = quat_geodesic(sim.root_rotation, ref.root_rotation);
  return (sim.root_position - ref.root_position).squaredNorm() + a * a;
}

RewardBreakdown compose(const RewardConfig& c, const RewardErrors& e) {
  for (double x : {e.pb, e.ph, e.vb, e.vh, e.e, e.r}) {
    if (!(x >= 0.0)) throw ContractError("compose: errors must be non-negative");
  }
  RewardBreakdown b;
  b.errors = e;
  b.r_pb = std::exp(-c.k_pb * e.pb);
  b.r_ph = std::exp(-c.k_ph * e.ph);
  b.r_vb = std::exp(-c.k_vb * e.vb);
  b.r_vh = std::exp(-c.k_vh * e.vh);
  b.r_e = std::exp(-c.k_e * e.e);
  b.r_r = std::exp(-c.k_r * e.r);
  b.total = b.r_pb * b.r_ph * b.r_vb * b.r_vh * b.r_e * b.r_r;
  return b;
}

RewardBreakdown evaluate_reward(const SkeletonModel& model, const RewardConfig& config, const RewardSets& sets,
                                const PoseD& sim, const Eigen::VectorXd& sim_qdot, const PoseD& ref,
                                const Eigen::VectorXd& ref_qdot) {
  RewardErrors e;
  e.pb = pose_error(model, sim, ref, sets.body);
  e.ph = pose_error(model, sim, ref, sets.hand);
  e.vb = velocity_error(model, sim_qdot, ref_qdot, sets.body);
  e.vh = velocity_error(model, sim_qdot, ref_qdot, sets.hand);
  e.e = end_effector_error(model, sim, ref, sets.end_effectors);
  e.r = root_error(sim, ref);
  return compose(config, e);
}

const std::vector<std::string>& reward_csv_header() {
  static const std::vector<std::string> header = {"step",   "r_pb",   "r_ph",   "r_vb",   "r_vh",  "r_e",  "r_r",
                                                  "total",  "eps_pb", "eps_ph", "eps_vb", "eps_vh", "eps_e", "eps_r"};
  return header;
}

std::vector<double> reward_csv_row(long step, const RewardBreakdown& b) {
  return {static_cast<double>(step), b.r_pb, b.r_ph, b.r_vb, b.r_vh, b.r_e, b.r_r, b.total,
          b.errors.pb, b.errors.ph, b.errors.vb, b.errors.vh, b.errors.e, b.errors.r};
}

Json to_json(const RewardConfig& c) {
  Json j;
  j["k_pb"] = c.k_pb;
  j["k_ph"] = c.k_ph;
  j["k_vb"] = c.k_vb;
  j["k_vh"] = c.k_vh;
  j["k_e"] = c.k_e;
  j["k_r"] = c.k_r;
  if (!c.body_joints.empty()) j["body_joints"] = c.body_joints;
  if (!c.hand_joints.empty()) j["hand_joints"] = c.hand_joints;
  if (!c.end_effectors.empty()) j["end_effectors"] = c.end_effectors;
  return j;
}

RewardConfig reward_config_from_json(const Json& j, const RewardConfig& base) {
  if (!j.is_object()) throw ConfigError("reward: expected object");
  RewardConfig c = base;
  auto number = [&](const char* key, double& out) {
    if (!j.contains(key)) return;
    if (!j[key].is_number()) throw ConfigError(std::string("reward.") + key + ": expected number");
    out = j[key].get<double>();
  };
  number("k_pb", c.k_pb);
  number("k_ph", c.k_ph);
  number("k_vb", c.k_vb);
  number("k_vh", c.k_vh);
  number("k_e", c.k_e);
  number("k_r", c.k_r);
  if (j.contains("body_joints")) c.body_joints = j["body_joints"].get<std::vector<std::string>>();
  if (j.contains("hand_joints")) c.hand_joints = j["hand_joints"].get<std::vector<std::string>>();
  if (j.contains("end_effectors")) c.end_effectors = j["end_effectors"].get<std::vector<std::string>>();
  for (double k : {c.k_pb, c.k_ph, c.k_vb, c.k_vh, c.k_e, c.k_r}) {
    if (!(k >= 0.0) || !std::isfinite(k)) throw ConfigError("reward: scaling factors must be finite and >= 0");
  }
  return c;
}

}  // namespace signmimic
