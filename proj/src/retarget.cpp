#include "signmimic/retarget.hpp"

#include "signmimic/error.hpp"

namespace signmimic {

std::string to_string(CeilingMode m) { return m == CeilingMode::kinematic ? "kinematic" : "pd_tracked"; }

CeilingMode ceiling_mode_from_string(const std::string& s) {
  if (s == "kinematic") return CeilingMode::kinematic;
  if (s == "pd_tracked") return CeilingMode::pd_tracked;
  throw ConfigError("ceiling mode: expected kinematic or pd_tracked, got '" + s + "'");
}

EpisodeConfig evaluation_episode(int steps, bool residual_actions) {
  EpisodeConfig e;
  e.max_steps = steps;
  e.early_stop_reward = 0.0;
  e.reference_state_init = false;
  e.residual_actions = residual_actions;
  return e;
}

namespace {

RolloutReport summarize(std::string label, std::vector<RewardBreakdown> series) {
  RolloutReport r;
  r.label = std::move(label);
  r.series = std::move(series);
  RewardBreakdown& m = r.mean;
  m.r_pb = m.r_ph = m.r_vb = m.r_vh = m.r_e = m.r_r = m.total = 0.0;
  for (const auto& b : r.series) {
    r.cumulative += b.total;
    m.r_pb += b.r_pb;
    m.r_ph += b.r_ph;
    m.r_vb += b.r_vb;
    m.r_vh += b.r_vh;
    m.r_e += b.r_e;
    m.r_r += b.r_r;
    m.errors.pb += b.errors.pb;
    m.errors.ph += b.errors.ph;
    m.errors.vb += b.errors.vb;
    m.errors.vh += b.errors.vh;
    m.errors.e += b.errors.e;
    m.errors.r += b.errors.r;
  }
  if (!r.series.empty()) {
    const double n = static_cast<double>(r.series.size());
    for (double* x : {&m.r_pb, &m.r_ph, &m.r_vb, &m.r_vh, &m.r_e, &m.r_r, &m.errors.pb, &m.errors.ph, &m.errors.vb,
                      &m.errors.vh, &m.errors.e, &m.errors.r}) {
      *x /= n;
    }
    m.total = r.cumulative / n;
  }
  return r;
}

}  // namespace

RolloutReport rollout(SignEnv& env, const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& policy, int steps) {
  if (steps <= 0) throw ConfigError("rollout: steps must be positive");
  std::vector<RewardBreakdown> series;
  series.reserve(steps);
  Eigen::VectorXd obs = env.observation();
  for (int s = 0; s < steps; ++s) {
    StepResult r = env.step(policy(obs));
    series.push_back(r.breakdown);
    obs = std::move(r.observation);
  }
  return summarize(env.track().clip.label, std::move(series));
}

RolloutReport rollout_reference(SignEnv& env, int steps) {
  if (steps <= 0) throw ConfigError("rollout: steps must be positive");
  std::vector<RewardBreakdown> series;
  series.reserve(steps);
  for (int s = 0; s < steps; ++s) series.push_back(env.step_reference().breakdown);
  return summarize(env.track().clip.label, std::move(series));
}

CeilingReport ceiling(std::shared_ptr<const SkeletonModel> model, const MotionClip& clip, const RewardConfig& config,
                      CeilingMode mode, int steps, SimConfig sim) {
  auto track = std::make_shared<const ReferenceTrack>(ReferenceTrack::build(*model, clip, sim.control_rate()));
  SignEnv env(model, track, config, evaluation_episode(steps), sim);
  env.reset(0);
  if (mode == CeilingMode::kinematic) return rollout_reference(env, steps);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(env.action_size());
  return rollout(env, [&](const Eigen::VectorXd&) { return zero; }, steps);
}

std::string report_csv(const RolloutReport& report) {
  CsvWriter csv(reward_csv_header());
  for (std::size_t i = 0; i < report.series.size(); ++i) csv.add_row(reward_csv_row(static_cast<long>(i), report.series[i]));
  return csv.str();
}

Json report_json(const RolloutReport& r) {
  Json j;
  j["label"] = r.label;
  j["steps"] = r.series.size();
  j["cumulative"] = r.cumulative;
  j["mean"] = {{"total", r.mean.total}, {"r_pb", r.mean.r_pb},         {"r_ph", r.mean.r_ph},
               {"r_vb", r.mean.r_vb},   {"r_vh", r.mean.r_vh},         {"r_e", r.mean.r_e},
               {"r_r", r.mean.r_r},     {"eps_pb", r.mean.errors.pb}, {"eps_ph", r.mean.errors.ph},
               {"eps_vb", r.mean.errors.vb}, {"eps_vh", r.mean.errors.vh}, {"eps_e", r.mean.errors.e},
               {"eps_r", r.mean.errors.r}};
  return j;
}

}  // namespace signmimic
