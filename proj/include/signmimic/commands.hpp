#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "signmimic/config.hpp"
#include "signmimic/motion.hpp"
#include "signmimic/retarget.hpp"
#include "signmimic/trainer.hpp"

namespace signmimic {

inline constexpr const char* kToolVersion = "0.1.0";

struct CommandOptions {
  int threads = 1;
  bool resume = true;
  long stop_after_updates = -1;
  bool quiet = true;
};

ConversionReport cmd_convert(const std::filesystem::path& capture, const std::filesystem::path& model,
                             const std::filesystem::path& out, const ConvertOptions& options);

/// Environment factory for one clip of a run: env `i` differs only by its seed.
EnvFactory make_env_factory(std::shared_ptr<const SkeletonModel> model, std::shared_ptr<const ReferenceTrack> track,
                            const RunConfig& config);

struct RunArtifact {
  std::filesystem::path dir;
  std::string clip_label;
  std::uint64_t seed = 0;
  TrainResult result;
};

/// One run per (clip, seed) in <out>/<clip label>/seed_<seed>, each with
/// curve.csv, checkpoints/ and manifest.json. Existing checkpoints are resumed.
std::vector<RunArtifact> cmd_train(const RunConfig& config, const CommandOptions& options = {});

/// Deterministic rollout of a checkpoint (or the reference pseudo-checkpoint)
/// from frame 0. Writes eval.json and eval.csv into `out` when non-empty.
RolloutReport cmd_eval(const std::filesystem::path& checkpoint, const RunConfig& config,
                       const std::filesystem::path& clip, int steps, const std::filesystem::path& out);

/// Writes a checkpoint that replays the reference kinematically.
void write_reference_checkpoint(const std::filesystem::path& path);

struct CeilingRow {
  std::string clip;
  CeilingMode mode;
  CeilingReport report;
};

std::vector<CeilingRow> cmd_ceiling(const RunConfig& config, const std::vector<CeilingMode>& modes, int steps,
                                    const std::filesystem::path& out);

/// Rows of per-step errors (eps_pb, eps_ph, eps_vb, eps_vh and optionally
/// eps_e, eps_r) as written by the metrics log.
std::vector<RewardErrors> load_error_trace(const std::filesystem::path& path);

struct Estimate {
  std::string name;
  RewardConfig factors;
  RewardBreakdown from_mean_errors;  // sub-rewards of the mean errors
  double pose_velocity_row_mean = 0.0;
};

/// Sub-rewards a factor set would assign to a recorded error trace.
Estimate estimate_rewards(const std::string& name, const RewardConfig& factors, const std::vector<RewardErrors>& trace);

/// factor-set file: {"sets": [{"name": ..., "k_pb": ..., ...}, ...]}.
std::vector<Estimate> cmd_estimate_rewards(const std::filesystem::path& trace, const std::filesystem::path& factor_sets,
                                           const std::filesystem::path& out);

struct SweepRow {
  int trial = 0;
  std::vector<double> values;
  double score = 0.0;
  int rank = 0;
};

/// Trials ranked by score, best first. Writes sweep.csv and sweep.json.
std::vector<SweepRow> cmd_sweep(const SweepSpec& spec, const RunConfig& config, const CommandOptions& options);

}  // namespace signmimic
