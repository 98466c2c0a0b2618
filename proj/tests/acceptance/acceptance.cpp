// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any requested criterion fails.
//
//   signmimic_acceptance [--criterion N]... [--threads T]

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "signmimic/commands.hpp"
#include "support/gradient_check.hpp"
#include "support/oracles.hpp"
#include "support/reward_properties.hpp"

using namespace signmimic;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_threads = 1;

fs::path work_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "signmimic_acceptance" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string fmt(double x, int precision = 6) {
  std::ostringstream s;
  s << std::setprecision(precision) << x;
  return s.str();
}

Outcome reward_algebra() {
  const auto f = oracle::check_reward_properties(10000, 20240601);
  RewardConfig c;
  c.k_pb = 2.0;
  RewardErrors e;
  e.pb = std::log(2.0) / 2.0;
  const double half = compose(c, e).r_pb;
  const bool pass = f.total() == 0 && std::abs(half - 0.5) <= 1e-12;
  return {pass, "10000 cases, violations range=" + std::to_string(f.range) + " identity=" + std::to_string(f.identity) +
                    " product=" + std::to_string(f.product) + " monotonicity=" + std::to_string(f.monotonicity) +
                    " annihilation=" + std::to_string(f.annihilation) + " leniency=" + std::to_string(f.leniency) +
                    "; |compose(2, ln2/2) - 0.5| = " + fmt(std::abs(half - 0.5), 3)};
}

RunConfig final_config() { return load_run_config(oracle::config_path("final.json")); }

Outcome kinematic_ceiling() {
  RunConfig cfg = final_config();
  cfg.clips.push_back(oracle::data_path("clips/tuning.clip"));
  const auto rows = cmd_ceiling(cfg, {CeilingMode::kinematic}, 2000, work_dir("criterion_2"));
  bool pass = rows.size() == cfg.clips.size();
  std::string detail;
  for (const auto& r : rows) {
    pass = pass && std::abs(r.report.cumulative - 2000.0) <= 1e-6;
    detail += r.clip + "=" + fmt(r.report.cumulative, 12) + " ";
  }
  return {pass, detail + "(bound 2000 +/- 1e-6)"};
}

Outcome pd_ceiling() {
  const RunConfig cfg = final_config();
  const auto rows = cmd_ceiling(cfg, {CeilingMode::pd_tracked}, 2000, work_dir("criterion_3"));
  bool pass = rows.size() == cfg.clips.size();
  std::string detail;
  for (const auto& r : rows) {
    pass = pass && r.report.cumulative >= 1900.0;
    detail += r.clip + "=" + fmt(r.report.cumulative) + " ";
  }
  return {pass, detail + "(threshold 1900)"};
}

// Time for the elbow to reach 90% of a 1 rad step from rest.
double elbow_t90(double kd) {
  const SkeletonModel m = load_skeleton_file(oracle::data_path("signer.model"));
  const JointDynamics full = JointDynamics::from_model(m);
  const int d = m.dof_index[m.joint_index("right_elbow")];
  JointDynamics p;
  p.inertia = full.inertia.segment(d, 1);
  p.kp = full.kp.segment(d, 1);
  p.kd = Eigen::VectorXd::Constant(1, kd);
  p.lower = full.lower.segment(d, 1);
  p.upper = full.upper.segment(d, 1);
  DynState s{Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1), 0.0};
  const ControlTarget target{Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Zero(1)};
  const double dt = 1.0 / 240.0;
  for (int i = 0; i < 240 * 10; ++i) {
    s = step(p, s, target, dt);
    if (s.q(0) >= 0.9) return s.time;
  }
  return std::numeric_limits<double>::infinity();
}

Outcome gain_refinement() {
  const double refined = elbow_t90(6.0);
  const double stiff = elbow_t90(30.0);
  return {refined < stiff, "elbow t90 kd=6: " + fmt(refined) + " s, kd=30: " + fmt(stiff) + " s"};
}

Outcome gradients() {
  double worst = 0.0;
  for (std::uint64_t point = 1; point <= 100; ++point) {
    const Activation act = point % 2 ? Activation::relu : Activation::tanh;
    worst = std::max(worst, oracle::ppo_gradient_check(1000 + point, act).max_relative_error);
  }
  return {worst < 1e-4, "max relative error " + fmt(worst, 3) + " over 100 points (threshold 1e-4)"};
}

Outcome advantage_oracle() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> envs(1, 4);
  double worst = 0.0;
  for (int b = 0; b < 1000; ++b) {
    const RolloutBuffer buf = oracle::random_buffer(10, envs(rng), rng);
    const double gamma = u(rng);
    const double lambda = u(rng);
    for (AdvantageMode mode : {AdvantageMode::paper, AdvantageMode::gae}) {
      const Advantages got = returns_and_advantages(buf, gamma, mode, lambda);
      const Advantages want = oracle::advantages(buf, gamma, mode, lambda);
      worst = std::max({worst, (got.returns - want.returns).cwiseAbs().maxCoeff(),
                        (got.advantages - want.advantages).cwiseAbs().maxCoeff()});
    }
  }
  return {worst <= 1e-12, "1000 buffers x 2 modes, max abs deviation " + fmt(worst, 3) + " (threshold 1e-12)"};
}

Outcome toy_learning() {
  RunConfig cfg = load_run_config(oracle::config_path("toy.json"));
  cfg.out_dir = work_dir("criterion_7");
  cfg.seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const long budget = cfg.scaled_total_steps();
  const auto model = std::make_shared<const SkeletonModel>(load_skeleton_file(cfg.model));
  const MotionClip clip = load_clip(*model, cfg.clips.at(0));
  const double bound = ceiling(model, clip, cfg.reward, CeilingMode::pd_tracked, cfg.eval_steps, cfg.sim).cumulative;

  CommandOptions opt;
  opt.threads = g_threads;
  opt.resume = false;
  int good = 0;
  std::string detail;
  for (const auto& run : cmd_train(cfg, opt)) {
    const double score =
        cmd_eval(run.dir / "checkpoints" / "latest.json", cfg, cfg.clips.at(0), cfg.eval_steps, {}).cumulative;
    if (score >= 0.9 * bound) ++good;
    detail += fmt(score / bound, 4) + " ";
  }
  return {good >= 8 && budget <= 200000, std::to_string(good) + "/10 seeds >= 0.9 of pd ceiling " + fmt(bound) +
                                            " after " + std::to_string(budget) + " steps; ratios " + detail};
}

// Mean of the per-step reward over the final tenth of training.
double late_reward(const TrainResult& r) {
  const std::size_t n = r.curve.size();
  const std::size_t k = std::max<std::size_t>(1, n / 10);
  double sum = 0.0;
  for (std::size_t i = n - k; i < n; ++i) sum += r.curve[i].reward_mean;
  return sum / static_cast<double>(k);
}

Outcome scaled_sign() {
  RunConfig tuned = final_config();
  tuned.clips = {tuned.clips.front()};
  tuned.seeds = {1};
  tuned.out_dir = work_dir("criterion_8") / "final_factors";
  RunConfig naive = tuned;
  const RewardConfig d = default_factor_config();
  naive.reward.k_pb = d.k_pb;
  naive.reward.k_ph = d.k_ph;
  naive.reward.k_vb = d.k_vb;
  naive.reward.k_vh = d.k_vh;
  naive.out_dir = tuned.out_dir.parent_path() / "default_factors";

  CommandOptions opt;
  opt.threads = g_threads;
  opt.resume = false;
  const RunArtifact run_a = cmd_train(tuned, opt).front();
  const RunArtifact run_b = cmd_train(naive, opt).front();
  const TrainResult& a = run_a.result;
  const TrainResult& b = run_b.result;
  const double ra = late_reward(a);
  const double rb = late_reward(b);
  const long steps = a.curve.empty() ? 0 : a.curve.back().step;
  // Each policy is evaluated under the reward it was trained on.
  auto evaluate = [](const RunArtifact& r, const RunConfig& cfg) {
    return cmd_eval(r.dir / "checkpoints" / "latest.json", cfg, cfg.clips.front(), cfg.eval_steps, {}).cumulative;
  };
  return {a.complete && b.complete && ra > rb,
          "per-step mean reward over the last tenth of " + std::to_string(steps) + " steps: final factors " + fmt(ra) +
              ", default factors " + fmt(rb, 3) + "; deterministic eval " + fmt(evaluate(run_a, tuned)) + " vs " +
              fmt(evaluate(run_b, naive), 3)};
}

Outcome reproducibility() {
  auto twice = [](RunConfig cfg, const std::string& name, int threads) {
    CommandOptions opt;
    opt.threads = threads;
    opt.resume = false;
    cfg.seeds = {3};
    cfg.clips = {cfg.clips.front()};
    std::string curves[2];
    for (int i = 0; i < 2; ++i) {
      cfg.out_dir = work_dir("criterion_9") / name / std::to_string(i);
      const auto runs = cmd_train(cfg, opt);
      curves[i] = read_text(runs.front().dir / "curve.csv");
    }
    return curves[0] == curves[1] && std::count(curves[0].begin(), curves[0].end(), '\n') > 1;
  };
  RunConfig toy = load_run_config(oracle::config_path("toy.json"));
  toy.train.total_steps = 10 * toy.train.steps_per_update();
  RunConfig sign = final_config();
  sign.budget_scale = 2.0 * sign.train.steps_per_update() / static_cast<double>(sign.train.total_steps);
  const bool a = twice(toy, "toy", 2);
  const bool b = twice(sign, "sign", g_threads);
  return {a && b, std::string("toy curves ") + (a ? "identical" : "differ") + ", sign-clip curves " +
                      (b ? "identical" : "differ")};
}

const char* kNames[] = {"reward algebra",     "kinematic ceiling", "pd-tracked ceiling",
                        "gain refinement",    "gradient check",    "advantage oracle",
                        "toy-scale learning", "scaled sign imitation", "reproducibility"};

Outcome run(int n) {
  switch (n) {
    case 1: return reward_algebra();
    case 2: return kinematic_ceiling();
    case 3: return pd_ceiling();
    case 4: return gain_refinement();
    case 5: return gradients();
    case 6: return advantage_oracle();
    case 7: return toy_learning();
    case 8: return scaled_sign();
    case 9: return reproducibility();
  }
  return {false, "unknown criterion"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"signmimic acceptance checks"};
  std::vector<int> criteria;
  app.add_option("--criterion", criteria, "Criterion number(s), default all")->check(CLI::Range(1, 9));
  app.add_option("--threads", g_threads, "Environment worker threads")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);
  if (criteria.empty()) criteria = {1, 2, 3, 4, 5, 6, 7, 8, 9};

  bool all = true;
  for (int n : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run(n);
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << n << " (" << kNames[n - 1] << "): " << o.detail
              << " [" << fmt(secs, 3) << " s]" << std::endl;
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
