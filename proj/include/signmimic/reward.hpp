#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "signmimic/io.hpp"
#include "signmimic/skeleton.hpp"

namespace signmimic {

/// Scaling factors and joint sets of the multiplicative imitation reward.
/// Defaults are the final factors; k_e and k_r follow the DeepMimic values.
struct RewardConfig {
  double k_pb = 2.0;
  double k_ph = 0.2;
  double k_vb = 5e-3;
  double k_vh = 1e-4;
  double k_e = 40.0;
  double k_r = 10.0;
  // Empty sets fall back to the model's joint groups.
  std::vector<std::string> body_joints;
  std::vector<std::string> hand_joints;
  std::vector<std::string> end_effectors;
};

/// The factor set used for hands and bodies before any tuning.
RewardConfig default_factor_config();

struct RewardErrors {
  double pb = 0.0, ph = 0.0, vb = 0.0, vh = 0.0, e = 0.0, r = 0.0;
};

struct RewardBreakdown {
  double r_pb = 1.0, r_ph = 1.0, r_vb = 1.0, r_vh = 1.0, r_e = 1.0, r_r = 1.0;
  double total = 1.0;
  RewardErrors errors;

  double pose_velocity() const { return r_pb * r_ph * r_vb * r_vh; }
};

/// Joint sets resolved against a model.
struct RewardSets {
  std::vector<int> body, hand, end_effectors;
};

/// Validates the configuration against the model: factors non-negative,
/// body/hand disjoint and covering every actuated joint, end effectors known.
RewardSets resolve(const RewardConfig& config, const SkeletonModel& model);

/// Sum of squared geodesic angles (spherical) or squared angle differences
/// (revolute) over the joint set.
double pose_error(const SkeletonModel& model, const PoseD& sim, const PoseD& ref, const std::vector<int>& joints);
double pose_error(const SkeletonModel& model, const PoseD& sim, const PoseD& ref,
                  const std::vector<std::string>& joints);

/// Sum of squared coordinate-velocity differences over the DoFs of the set.
double velocity_error(const SkeletonModel& model, const Eigen::VectorXd& sim_qdot, const Eigen::VectorXd& ref_qdot,
                      const std::vector<int>& joints);

/// Sum over end effectors of squared world-position distance (m^2).
double end_effector_error(const SkeletonModel& model, const PoseD& sim, const PoseD& ref,
                          const std::vector<int>& end_effectors);
double end_effector_error(const SkeletonModel& model, const PoseD& sim, const PoseD& ref);

/// Root position and orientation error.
double root_error(const PoseD& sim, const PoseD& ref);

/// exp(-k eps) per term; total is the product of the six sub-rewards.
RewardBreakdown compose(const RewardConfig& config, const RewardErrors& errors);

/// All four errors plus composition for one simulated/reference pair.
RewardBreakdown evaluate_reward(const SkeletonModel& model, const RewardConfig& config, const RewardSets& sets,
                                const PoseD& sim, const Eigen::VectorXd& sim_qdot, const PoseD& ref,
                                const Eigen::VectorXd& ref_qdot);

/// Metrics-log header: step, the seven rewards, the six errors.
const std::vector<std::string>& reward_csv_header();
std::vector<double> reward_csv_row(long step, const RewardBreakdown& b);

Json to_json(const RewardConfig& config);
RewardConfig reward_config_from_json(const Json& j, const RewardConfig& base = {});

}  // namespace signmimic
