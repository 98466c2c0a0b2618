// signmimic command-line tool. Exit codes: 0 success, 2 configuration or
// input error, 3 numeric failure.

#include <CLI11.hpp>
#include <iostream>

#include "signmimic/commands.hpp"
#include "signmimic/error.hpp"

namespace fs = std::filesystem;
using namespace signmimic;

namespace {

struct Globals {
  std::string config;
  std::vector<std::uint64_t> seeds;
  std::string out;
  int threads = 1;
};

RunConfig run_config(const Globals& g, bool require) {
  RunConfig c;
  if (!g.config.empty()) {
    c = load_run_config(g.config);
  } else if (require) {
    throw ConfigError("--config is required for this command");
  }
  if (!g.seeds.empty()) c.seeds = g.seeds;
  if (!g.out.empty()) c.out_dir = g.out;
  return c;
}

void print(const Json& j) { std::cout << j.dump(2) << "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Physics-based imitation of signing motions"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "Run configuration (JSON)");
  app.add_option("--seed", g.seeds, "Seed(s), replacing the config's seed list");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--threads", g.threads, "Environment worker threads")->check(CLI::PositiveNumber);

  auto* convert = app.add_subcommand("convert", "Convert a pose-estimator capture into a motion clip");
  std::string capture, model, clip_out;
  ConvertOptions copts;
  convert->add_option("--capture", capture, "Capture document or per-frame directory")->required();
  convert->add_option("--model", model, "Skeleton model")->required();
  convert->add_option("--clip", clip_out, "Output clip file")->required();
  convert->add_option("--label", copts.label, "Clip label (default: output file stem)");
  convert->add_option("--rate", copts.target_rate, "Target frame rate; <= 0 keeps the capture rate");
  convert->add_flag("--smooth", copts.smoothing, "5-frame moving average on rotations");
  convert->add_flag("--root-translation", copts.use_root_translation, "Keep the capture's root translation");

  auto* train = app.add_subcommand("train", "Train one policy per (clip, seed)");
  bool fresh = false;
  long stop_after = -1;
  bool verbose = false;
  train->add_flag("--fresh", fresh, "Ignore existing checkpoints");
  train->add_option("--stop-after", stop_after, "Stop after this many updates (resumable)");
  train->add_flag("-v,--verbose", verbose, "Log every update to stderr");

  auto* eval = app.add_subcommand("eval", "Deterministic rollout of a checkpoint");
  std::string checkpoint, eval_clip;
  int eval_steps = 0;
  eval->add_option("--checkpoint", checkpoint, "Checkpoint file, or 'reference' for the kinematic replay")->required();
  eval->add_option("--clip", eval_clip, "Clip to track (default: first clip of the config)");
  eval->add_option("--steps", eval_steps, "Control steps (default: the config's eval_steps)");

  auto* sweep = app.add_subcommand("sweep", "Grid or random search over configuration values");
  std::string spec_path;
  sweep->add_option("--spec", spec_path, "Sweep specification (JSON)")->required();

  auto* ceil = app.add_subcommand("ceiling", "Reward ceiling of ideal retargeting");
  std::string mode = "both";
  int ceil_steps = 2000;
  ceil->add_option("--mode", mode, "kinematic, pd_tracked or both")
      ->check(CLI::IsMember({"kinematic", "pd_tracked", "both"}));
  ceil->add_option("--steps", ceil_steps, "Control steps")->check(CLI::PositiveNumber);

  auto* estimate = app.add_subcommand("estimate-rewards", "Replay an error trace through factor sets");
  std::string trace, factors;
  estimate->add_option("--trace", trace, "Error trace CSV")->required();
  estimate->add_option("--factors", factors, "Factor sets (JSON)")->required();

  for (auto* sub : {convert, train, eval, sweep, ceil, estimate}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*convert) {
      const ConversionReport r = cmd_convert(capture, model, clip_out, copts);
      print({{"clip", clip_out},
             {"label", r.clip.label},
             {"frames", r.clip.size()},
             {"rate", r.clip.rate},
             {"rejected_frames", r.rejected_frames},
             {"mirrored_left", r.mirrored_left},
             {"mirrored_right", r.mirrored_right}});
    } else if (*train) {
      CommandOptions o;
      o.threads = g.threads;
      o.resume = !fresh;
      o.stop_after_updates = stop_after;
      o.quiet = !verbose;
      Json out = Json::array();
      for (const auto& run : cmd_train(run_config(g, true), o)) {
        out.push_back({{"dir", run.dir.string()},
                       {"clip", run.clip_label},
                       {"seed", run.seed},
                       {"updates", run.result.updates_done},
                       {"complete", run.result.complete},
                       {"final_reward_mean", run.result.curve.empty() ? 0.0 : run.result.curve.back().reward_mean}});
      }
      print(out);
    } else if (*eval) {
      const RunConfig c = run_config(g, true);
      const fs::path clip = eval_clip.empty() ? c.clips.at(0) : fs::path(eval_clip);
      fs::path ckpt = checkpoint;
      if (checkpoint == "reference") {
        ckpt = fs::temp_directory_path() / "signmimic_reference_checkpoint.json";
        write_reference_checkpoint(ckpt);
      }
      const RolloutReport r = cmd_eval(ckpt, c, clip, eval_steps > 0 ? eval_steps : c.eval_steps, g.out);
      print(report_json(r));
    } else if (*sweep) {
      CommandOptions o;
      o.threads = g.threads;
      const auto rows = cmd_sweep(load_sweep_spec(spec_path), run_config(g, true), o);
      Json out = Json::array();
      for (const auto& r : rows) out.push_back({{"rank", r.rank}, {"trial", r.trial}, {"values", r.values}, {"score", r.score}});
      print(out);
    } else if (*ceil) {
      std::vector<CeilingMode> modes;
      if (mode != "pd_tracked") modes.push_back(CeilingMode::kinematic);
      if (mode != "kinematic") modes.push_back(CeilingMode::pd_tracked);
      Json out = Json::array();
      const RunConfig c = run_config(g, true);
      for (const auto& row : cmd_ceiling(c, modes, ceil_steps, g.out)) {
        out.push_back({{"clip", row.clip}, {"mode", to_string(row.mode)}, {"cumulative", row.report.cumulative}});
      }
      print(out);
    } else if (*estimate) {
      Json out = Json::array();
      for (const auto& e : cmd_estimate_rewards(trace, factors, g.out)) {
        out.push_back({{"name", e.name},
                       {"pose_velocity", e.from_mean_errors.pose_velocity()},
                       {"total", e.from_mean_errors.total}});
      }
      print(out);
    }
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const InstabilityError& e) {
    std::cerr << "instability: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
