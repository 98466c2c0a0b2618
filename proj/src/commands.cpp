#include "signmimic/commands.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "signmimic/error.hpp"

namespace signmimic {

namespace {

struct LoadedClip {
  std::shared_ptr<const ReferenceTrack> track;
  std::string hash;
};

std::shared_ptr<const SkeletonModel> load_model(const RunConfig& config) {
  return std::make_shared<const SkeletonModel>(load_skeleton_file(config.model));
}

LoadedClip load_track(const SkeletonModel& model, const std::filesystem::path& path, const SimConfig& sim) {
  const MotionClip clip = load_clip(model, path);
  LoadedClip out;
  out.hash = hex64(fnv1a(clip_to_json(model, clip)));
  out.track = std::make_shared<const ReferenceTrack>(ReferenceTrack::build(model, clip, sim.control_rate()));
  return out;
}

std::string fingerprint(const SkeletonModel& model, const std::string& clip_hash) {
  return "model=" + hex64(model.fingerprint) + " clip=" + clip_hash;
}

}  // namespace

ConversionReport cmd_convert(const std::filesystem::path& capture, const std::filesystem::path& model_path,
                             const std::filesystem::path& out, const ConvertOptions& options) {
  const SkeletonModel model = load_skeleton_file(model_path);
  ConvertOptions opts = options;
  if (opts.label.empty()) opts.label = out.stem().string();
  ConversionReport report = convert(load_capture(capture), model, opts);
  save_clip(model, report.clip, out);
  return report;
}

EnvFactory make_env_factory(std::shared_ptr<const SkeletonModel> model, std::shared_ptr<const ReferenceTrack> track,
                            const RunConfig& config) {
  return [model, track, reward = config.reward, episode = config.episode, sim = config.sim](int) {
    return std::make_unique<SignEnv>(model, track, reward, episode, sim);
  };
}

std::vector<RunArtifact> cmd_train(const RunConfig& config, const CommandOptions& options) {
  config.validate();
  const auto model = load_model(config);
  std::vector<RunArtifact> runs;
  for (const auto& clip_path : config.clips) {
    const LoadedClip clip = load_track(*model, clip_path, config.sim);
    const std::string label = clip.track->clip.label;
    for (std::uint64_t seed : config.seeds) {
      RunArtifact run;
      run.dir = config.out_dir / label / ("seed_" + std::to_string(seed));
      run.clip_label = label;
      run.seed = seed;

      TrainConfig tc = config.train;
      tc.total_steps = config.scaled_total_steps();
      tc.seed = seed;

      Json manifest;
      manifest["tool_version"] = kToolVersion;
      manifest["config_hash"] = config_hash(config);
      manifest["model_hash"] = hex64(model->fingerprint);
      manifest["clip_hash"] = clip.hash;
      manifest["clip"] = label;
      manifest["seed"] = seed;
      manifest["effective_total_steps"] = tc.total_steps;
      manifest["num_envs"] = tc.num_envs;
      manifest["config"] = to_json(config);
      write_text(run.dir / "manifest.json", manifest.dump(2) + "\n");

      TrainOptions to;
      to.out_dir = run.dir;
      to.resume = options.resume;
      to.stop_after_updates = options.stop_after_updates;
      to.threads = options.threads;
      to.fingerprint = fingerprint(*model, clip.hash);
      if (!options.quiet) {
        to.on_update = [&](const CurveRow& r) {
          std::cerr << label << " seed " << seed << " step " << r.step << " reward " << format_double(r.reward_mean)
                    << "\n";
        };
      }
      run.result = train(make_env_factory(model, clip.track, config), tc, to);
      runs.push_back(std::move(run));
    }
  }
  return runs;
}

void write_reference_checkpoint(const std::filesystem::path& path) {
  const Json j = {{"format", "signmimic-checkpoint"}, {"schema_version", 1}, {"kind", "reference"}};
  write_text(path, j.dump(2) + "\n");
}

RolloutReport cmd_eval(const std::filesystem::path& checkpoint, const RunConfig& config,
                       const std::filesystem::path& clip_path, int steps, const std::filesystem::path& out) {
  if (steps <= 0) throw ConfigError("eval: steps must be positive");
  const auto model = load_model(config);
  const LoadedClip clip = load_track(*model, clip_path, config.sim);
  SignEnv env(model, clip.track, config.reward, evaluation_episode(steps, config.episode.residual_actions), config.sim);
  env.reset(0);

  const Json doc = Json::parse(read_text(checkpoint), nullptr, false);
  if (doc.is_discarded() || doc.value("format", "") != "signmimic-checkpoint") {
    throw ConfigError(checkpoint.string() + ": not a checkpoint");
  }
  RolloutReport report;
  if (doc.value("kind", "policy") == "reference") {
    report = rollout_reference(env, steps);
  } else {
    const Checkpoint ckpt = load_checkpoint(checkpoint);
    if (ckpt.params.policy.mean.input_size() != env.observation_size() ||
        ckpt.params.policy.mean.output_size() != env.action_size()) {
      throw ConfigError("eval: checkpoint does not match the model's observation/action sizes");
    }
    const GaussianPolicy& policy = ckpt.params.policy;
    report = rollout(env, [&](const Eigen::VectorXd& obs) {
      return Eigen::VectorXd(policy_forward(policy, obs, nullptr).mean.col(0));
    }, steps);
  }
  if (!out.empty()) {
    write_text(out / "eval.json", report_json(report).dump(2) + "\n");
    write_text(out / "eval.csv", report_csv(report));
  }
  return report;
}

std::vector<CeilingRow> cmd_ceiling(const RunConfig& config, const std::vector<CeilingMode>& modes, int steps,
                                    const std::filesystem::path& out) {
  const auto model = load_model(config);
  std::vector<CeilingRow> rows;
  Json summary = Json::array();
  for (const auto& clip_path : config.clips) {
    const MotionClip clip = load_clip(*model, clip_path);
    for (CeilingMode mode : modes) {
      CeilingRow row{clip.label, mode, ceiling(model, clip, config.reward, mode, steps, config.sim)};
      if (!out.empty()) {
        const std::string stem = clip.label + "_" + to_string(mode);
        Json j = report_json(row.report);
        j["mode"] = to_string(mode);
        write_text(out / (stem + ".json"), j.dump(2) + "\n");
        write_text(out / (stem + ".csv"), report_csv(row.report));
        summary.push_back(std::move(j));
      }
      rows.push_back(std::move(row));
    }
  }
  if (!out.empty()) write_text(out / "ceiling.json", summary.dump(2) + "\n");
  return rows;
}

std::vector<RewardErrors> load_error_trace(const std::filesystem::path& path) {
  const CsvTable table = parse_csv(read_text(path));
  const int pb = table.column("eps_pb"), ph = table.column("eps_ph"), vb = table.column("eps_vb"),
            vh = table.column("eps_vh");
  if (pb < 0 || ph < 0 || vb < 0 || vh < 0) {
    throw ConfigError(path.string() + ": trace needs eps_pb, eps_ph, eps_vb and eps_vh columns");
  }
  const int e = table.column("eps_e"), r = table.column("eps_r");
  std::vector<RewardErrors> out;
  out.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    RewardErrors x;
    x.pb = row[pb];
    x.ph = row[ph];
    x.vb = row[vb];
    x.vh = row[vh];
    if (e >= 0) x.e = row[e];
    if (r >= 0) x.r = row[r];
    for (double v : {x.pb, x.ph, x.vb, x.vh, x.e, x.r}) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(path.string() + ": errors must be finite and >= 0");
    }
    out.push_back(x);
  }
  if (out.empty()) throw ConfigError(path.string() + ": empty trace");
  return out;
}

Estimate estimate_rewards(const std::string& name, const RewardConfig& factors, const std::vector<RewardErrors>& trace) {
  if (trace.empty()) throw ContractError("estimate_rewards: empty trace");
  RewardErrors mean;
  double row_mean = 0.0;
  for (const auto& e : trace) {
    mean.pb += e.pb;
    mean.ph += e.ph;
    mean.vb += e.vb;
    mean.vh += e.vh;
    mean.e += e.e;
    mean.r += e.r;
    row_mean += compose(factors, e).pose_velocity();
  }
  const double n = static_cast<double>(trace.size());
  for (double* x : {&mean.pb, &mean.ph, &mean.vb, &mean.vh, &mean.e, &mean.r}) *x /= n;
  Estimate est;
  est.name = name;
  est.factors = factors;
  est.from_mean_errors = compose(factors, mean);
  est.pose_velocity_row_mean = row_mean / n;
  return est;
}

std::vector<Estimate> cmd_estimate_rewards(const std::filesystem::path& trace_path,
                                           const std::filesystem::path& factor_sets, const std::filesystem::path& out) {
  const auto trace = load_error_trace(trace_path);
  const Json doc = Json::parse(read_text(factor_sets), nullptr, false);
  if (doc.is_discarded() || !doc.contains("sets") || !doc["sets"].is_array()) {
    throw ConfigError(factor_sets.string() + ": expected {\"sets\": [...]}");
  }
  std::vector<Estimate> rows;
  for (const auto& s : doc["sets"]) {
    if (!s.contains("name")) throw ConfigError(factor_sets.string() + ": every set needs a name");
    Json factors = s;
    factors.erase("name");
    rows.push_back(estimate_rewards(s["name"].get<std::string>(), reward_config_from_json(factors), trace));
  }
  if (!out.empty()) {
    std::string csv = "name,k_pb,k_ph,k_vb,k_vh,r_pb,r_ph,r_vb,r_vh,pose_velocity,pose_velocity_row_mean,total\n";
    Json j = Json::array();
    for (const auto& r : rows) {
      const RewardBreakdown& b = r.from_mean_errors;
      csv += r.name;
      for (double v : {r.factors.k_pb, r.factors.k_ph, r.factors.k_vb, r.factors.k_vh, b.r_pb, b.r_ph, b.r_vb, b.r_vh,
                       b.pose_velocity(), r.pose_velocity_row_mean, b.total}) {
        csv += "," + format_double(v);
      }
      csv += "\n";
      j.push_back({{"name", r.name},
                   {"factors", to_json(r.factors)},
                   {"r_pb", b.r_pb},
                   {"r_ph", b.r_ph},
                   {"r_vb", b.r_vb},
                   {"r_vh", b.r_vh},
                   {"pose_velocity", b.pose_velocity()},
                   {"pose_velocity_row_mean", r.pose_velocity_row_mean},
                   {"total", b.total}});
    }
    write_text(out / "estimates.csv", csv);
    write_text(out / "estimates.json", j.dump(2) + "\n");
  }
  return rows;
}

std::vector<SweepRow> cmd_sweep(const SweepSpec& spec, const RunConfig& config, const CommandOptions& options) {
  spec.validate();
  const auto trials = sweep_trials(spec);
  const Json base = to_json(config);
  std::vector<RewardErrors> trace;
  if (spec.objective == "estimate") trace = load_error_trace(spec.trace);

  std::vector<SweepRow> rows;
  for (std::size_t t = 0; t < trials.size(); ++t) {
    Json j = base;
    for (std::size_t a = 0; a < spec.axes.size(); ++a) j = apply_override(j, spec.axes[a].first, trials[t][a]);
    RunConfig trial = run_config_from_json(j);
    SweepRow row;
    row.trial = static_cast<int>(t);
    row.values = trials[t];
    if (spec.objective == "estimate") {
      row.score = estimate_rewards("trial", trial.reward, trace).from_mean_errors.pose_velocity();
    } else {
      trial.out_dir = config.out_dir / ("trial_" + std::to_string(t));
      trial.budget_scale = config.budget_scale * spec.budget_fraction;
      trial.seeds = {config.seeds.front()};
      trial.clips = {config.clips.front()};
      const auto runs = cmd_train(trial, options);
      row.score = runs.front().result.curve.back().reward_mean;
    }
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) { return a.score > b.score; });
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].rank = static_cast<int>(i) + 1;

  if (!config.out_dir.empty()) {
    std::vector<std::string> header{"rank", "trial"};
    for (const auto& [name, values] : spec.axes) header.push_back(name);
    header.push_back("score");
    CsvWriter csv(header);
    Json j = Json::array();
    for (const auto& r : rows) {
      std::vector<double> values{static_cast<double>(r.rank), static_cast<double>(r.trial)};
      values.insert(values.end(), r.values.begin(), r.values.end());
      values.push_back(r.score);
      csv.add_row(values);
      Json entry = {{"rank", r.rank}, {"trial", r.trial}, {"score", r.score}};
      for (std::size_t a = 0; a < spec.axes.size(); ++a) entry["values"][spec.axes[a].first] = r.values[a];
      j.push_back(std::move(entry));
    }
    write_text(config.out_dir / "sweep.csv", csv.str());
    write_text(config.out_dir / "sweep.json", j.dump(2) + "\n");
  }
  return rows;
}

}  // namespace signmimic
