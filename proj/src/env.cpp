#include "signmimic/env.hpp"

#include <unsupported/Eigen/AutoDiff>
#include <cmath>
#include <sstream>

namespace signmimic {

namespace {

using Dual = Eigen::AutoDiffScalar<Eigen::Matrix<double, 1, 1>>;
using DualVector = Eigen::Matrix<Dual, Eigen::Dynamic, 1>;

constexpr int kLinkFeatures = 13;

}  // namespace

ReferenceTrack ReferenceTrack::build(const SkeletonModel& model, const MotionClip& clip, double control_rate) {
  ReferenceTrack track;
  track.clip = std::abs(clip.rate - control_rate) > 1e-9 ? resample(clip, control_rate) : clip;
  for (const auto& frame : track.clip.frames) validate_pose(model, frame);
  track.states = rollout_kinematic(model, track.clip);
  track.base = rest_pose(model);
  track.base.root_position = track.clip.frames.front().root_position;
  track.base.root_rotation = track.clip.frames.front().root_rotation;
  track.poses.reserve(track.states.size());
  for (const auto& st : track.states) track.poses.push_back(pose_from_coordinates<double>(model, st.q, track.base));
  return track;
}

int observation_size(const SkeletonModel& model) { return 1 + kLinkFeatures * model.num_links(); }

Eigen::VectorXd observe(const SkeletonModel& model, const DynState& state, const PoseD& base, double phase) {
  if (state.q.size() != model.total_dofs || state.qdot.size() != model.total_dofs) {
    throw ContractError("observe: state does not match model");
  }
  DualVector q(model.total_dofs);
  for (int i = 0; i < model.total_dofs; ++i) {
    q(i) = Dual(state.q(i), Eigen::Matrix<double, 1, 1>(state.qdot(i)));
  }
  const Pose<Dual> pose = pose_from_coordinates<Dual>(model, q, base);
  const auto frames = forward_kinematics(model, pose);

  const Eigen::Quaterniond root_inv = base.root_rotation.conjugate();
  const Eigen::Vector3d root_pos = base.root_position;

  Eigen::VectorXd obs(observation_size(model));
  obs(0) = phase;
  int k = 1;
  for (const auto& f : frames) {
    Eigen::Vector3d p, v;
    for (int a = 0; a < 3; ++a) {
      p(a) = f.position(a).value();
      v(a) = f.position(a).derivatives()(0);
    }
    const Eigen::Quaterniond rot(f.rotation.w().value(), f.rotation.x().value(), f.rotation.y().value(),
                                 f.rotation.z().value());
    const Eigen::Quaterniond rot_dot(f.rotation.w().derivatives()(0), f.rotation.x().derivatives()(0),
                                     f.rotation.y().derivatives()(0), f.rotation.z().derivatives()(0));
    // omega_world = 2 qdot q^*
    const Eigen::Vector3d omega = 2.0 * (rot_dot * rot.conjugate()).vec();

    obs.segment<3>(k) = root_inv * (p - root_pos);
    const Eigen::Quaterniond rel = canonical<double>(root_inv * rot);
    obs.segment<4>(k + 3) << rel.w(), rel.x(), rel.y(), rel.z();
    obs.segment<3>(k + 7) = root_inv * v;
    obs.segment<3>(k + 10) = root_inv * omega;
    k += kLinkFeatures;
  }
  return obs;
}

SignEnv::SignEnv(std::shared_ptr<const SkeletonModel> model, std::shared_ptr<const ReferenceTrack> track,
                 RewardConfig reward, EpisodeConfig episode, SimConfig sim)
    : model_(std::move(model)),
      track_(std::move(track)),
      reward_(std::move(reward)),
      episode_(episode),
      sim_(sim),
      plant_(JointDynamics::from_model(*model_)),
      obs_size_(signmimic::observation_size(*model_)) {
  sets_ = resolve(reward_, *model_);
  if (episode_.max_steps < 0) throw ConfigError("episode.max_steps must be >= 0");
  if (!(episode_.early_stop_reward >= 0.0 && episode_.early_stop_reward < 1.0)) {
    throw ConfigError("episode.early_stop_reward must lie in [0, 1)");
  }
  if (track_->size() < 2) throw ConfigError("env: reference clip needs at least 2 frames");
  if (std::abs(track_->clip.rate - sim_.control_rate()) > 1e-9) {
    throw ConfigError("env: reference track rate differs from the control rate");
  }
  state_ = track_->states.front();
}

int SignEnv::max_steps() const { return episode_.max_steps > 0 ? episode_.max_steps : track_->size(); }

Eigen::VectorXd SignEnv::reset(std::uint64_t seed) {
  rng_.seed(seed);
  return reset();
}

Eigen::VectorXd SignEnv::reset() {
  frame_ = 0;
  if (episode_.reference_state_init) {
    std::uniform_int_distribution<int> pick(0, track_->size() - 1);
    frame_ = pick(rng_);
  }
  steps_ = 0;
  state_ = track_->states[frame_];
  state_.time = 0.0;
  return observation();
}

Eigen::VectorXd SignEnv::observation() const {
  return observe(*model_, state_, track_->base, track_->clip.phase[frame_]);
}

StepResult SignEnv::step(const Eigen::VectorXd& action) {
  if (action.size() != action_size()) throw ContractError("env.step: action dimension mismatch");
  if (!action.allFinite()) throw ContractError("env.step: non-finite action");
  const int next = (frame_ + 1) % track_->size();
  const DynState& ref = track_->states[next];

  ControlTarget target;
  target.q_des = episode_.residual_actions ? Eigen::VectorXd(ref.q + action) : action;
  target.q_des = target.q_des.cwiseMax(plant_.lower).cwiseMin(plant_.upper);
  target.qdot_des = Eigen::VectorXd::Zero(action.size());
  for (int s = 0; s < sim_.substeps; ++s) state_ = signmimic::step(plant_, state_, target, sim_.dt);
  frame_ = next;
  return finish_step();
}

StepResult SignEnv::step_reference() {
  frame_ = (frame_ + 1) % track_->size();
  const double t = state_.time + sim_.dt * sim_.substeps;
  state_ = track_->states[frame_];
  state_.time = t;
  return finish_step();
}

StepResult SignEnv::finish_step() {
  ++steps_;
  const DynState& ref = track_->states[frame_];
  const PoseD sim_pose = pose_from_coordinates<double>(*model_, state_.q, track_->base);
  StepResult out;
  out.breakdown = evaluate_reward(*model_, reward_, sets_, sim_pose, state_.qdot, track_->poses[frame_],
                                  ref.qdot);
  out.reward = out.breakdown.total;
  out.terminated = episode_.early_stop_reward > 0.0 && out.reward < episode_.early_stop_reward;
  out.done = out.terminated || steps_ >= max_steps();
  out.observation = observation();
  return out;
}

Json SignEnv::save_state() const {
  Json j;
  j["q"] = to_json(state_.q);
  j["qdot"] = to_json(state_.qdot);
  j["time"] = state_.time;
  j["frame"] = frame_;
  j["steps"] = steps_;
  std::ostringstream rng;
  rng << rng_;
  j["rng"] = rng.str();
  return j;
}

void SignEnv::load_state(const Json& j) {
  state_.q = vector_from_json(j.at("q"), "env.q");
  state_.qdot = vector_from_json(j.at("qdot"), "env.qdot");
  state_.time = j.at("time").get<double>();
  frame_ = j.at("frame").get<int>();
  steps_ = j.at("steps").get<int>();
  std::istringstream rng(j.at("rng").get<std::string>());
  rng >> rng_;
  if (state_.q.size() != action_size() || frame_ < 0 || frame_ >= track_->size()) {
    throw ConfigError("env: saved state does not match environment");
  }
}

}  // namespace signmimic
