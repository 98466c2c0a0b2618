#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "signmimic/env.hpp"

namespace signmimic {

enum class CeilingMode { kinematic, pd_tracked };

std::string to_string(CeilingMode m);
CeilingMode ceiling_mode_from_string(const std::string& s);

/// Per-step rewards of a fixed-length rollout.
struct RolloutReport {
  std::string label;
  std::vector<RewardBreakdown> series;
  double cumulative = 0.0;  // sum of series totals
  RewardBreakdown mean;     // per-term means
};

using CeilingReport = RolloutReport;

/// Episode settings for fixed-length evaluation: start at frame 0, no early
/// stop, the clip loops until `steps` control steps have elapsed.
EpisodeConfig evaluation_episode(int steps, bool residual_actions = true);

/// kinematic: the state is set to each reference frame. pd_tracked: the PD
/// controllers track the reference with zero residual action.
CeilingReport ceiling(std::shared_ptr<const SkeletonModel> model, const MotionClip& clip, const RewardConfig& config,
                      CeilingMode mode, int steps = 2000, SimConfig sim = {});

/// Rolls `env` forward `steps` times from its current state, ignoring episode ends.
RolloutReport rollout(SignEnv& env, const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& policy, int steps);
RolloutReport rollout_reference(SignEnv& env, int steps);

std::string report_csv(const RolloutReport& report);
Json report_json(const RolloutReport& report);

}  // namespace signmimic
