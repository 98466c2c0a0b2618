#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <random>
#include <string>

#include "signmimic/dynamics.hpp"
#include "signmimic/io.hpp"
#include "signmimic/motion.hpp"
#include "signmimic/reward.hpp"
#include "signmimic/skeleton.hpp"

namespace signmimic {

struct SimConfig {
  double dt = 1.0 / 240.0;
  int substeps = 8;
  double control_rate() const { return 1.0 / (dt * substeps); }
};

struct EpisodeConfig {
  int max_steps = 0;               // 0: one pass over the clip
  double early_stop_reward = 0.0;  // 0 disables early termination
  bool reference_state_init = true;
  bool residual_actions = true;    // actions offset the reference pose
};

/// A clip at the control rate together with its kinematic joint-space states.
/// Shared read-only between environment instances.
struct ReferenceTrack {
  MotionClip clip;
  std::vector<DynState> states;
  std::vector<PoseD> poses;  // states[i].q mapped back to poses
  PoseD base;                // root pose and non-actuated joints

  static ReferenceTrack build(const SkeletonModel& model, const MotionClip& clip, double control_rate);
  int size() const { return clip.size(); }
};

int observation_size(const SkeletonModel& model);

/// Phase followed by, for every link, its position (3), orientation (4, w >= 0),
/// linear velocity (3) and angular velocity (3), all expressed in the root
/// frame. Velocities are exact time derivatives of the kinematics along qdot.
Eigen::VectorXd observe(const SkeletonModel& model, const DynState& state, const PoseD& base, double phase);

struct StepResult {
  Eigen::VectorXd observation;
  double reward = 0.0;
  bool done = false;
  bool terminated = false;  // early stop; done without terminated is a time limit
  RewardBreakdown breakdown;
};

/// Imitation MDP for one clip. Single-threaded; instances share only the
/// immutable model and reference track.
class SignEnv {
 public:
  SignEnv(std::shared_ptr<const SkeletonModel> model, std::shared_ptr<const ReferenceTrack> track,
          RewardConfig reward, EpisodeConfig episode, SimConfig sim = {});

  Eigen::VectorXd reset(std::uint64_t seed);
  Eigen::VectorXd reset();

  /// Applies the action as PD targets for one control period.
  StepResult step(const Eigen::VectorXd& action);

  /// Sets the state exactly to the next reference frame (ideal retargeting).
  StepResult step_reference();

  Eigen::VectorXd observation() const;
  int observation_size() const { return obs_size_; }
  int action_size() const { return model_->total_dofs; }
  int max_steps() const;
  int frame() const { return frame_; }
  int steps() const { return steps_; }
  const DynState& state() const { return state_; }
  const SkeletonModel& model() const { return *model_; }
  const ReferenceTrack& track() const { return *track_; }
  const RewardConfig& reward_config() const { return reward_; }
  const EpisodeConfig& episode_config() const { return episode_; }
  const JointDynamics& plant() const { return plant_; }
  void set_plant(JointDynamics plant) { plant_ = std::move(plant); }

  Json save_state() const;
  void load_state(const Json& j);

 private:
  StepResult finish_step();

  std::shared_ptr<const SkeletonModel> model_;
  std::shared_ptr<const ReferenceTrack> track_;
  RewardConfig reward_;
  RewardSets sets_;
  EpisodeConfig episode_;
  SimConfig sim_;
  JointDynamics plant_;
  int obs_size_ = 0;

  std::mt19937_64 rng_;
  DynState state_;
  int frame_ = 0;
  int steps_ = 0;
};

}  // namespace signmimic
