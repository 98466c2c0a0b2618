#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "signmimic/env.hpp"
#include "signmimic/io.hpp"
#include "signmimic/ppo.hpp"
#include "signmimic/reward.hpp"

namespace signmimic {

/// Everything a training or evaluation run needs. Relative paths in the file
/// are resolved against the directory containing it.
struct RunConfig {
  std::filesystem::path model;
  std::vector<std::filesystem::path> clips;
  RewardConfig reward;
  TrainConfig train;
  EpisodeConfig episode;
  SimConfig sim;
  std::filesystem::path out_dir = "runs";
  std::vector<std::uint64_t> seeds{1};
  double budget_scale = 0.01;  // multiplies train.total_steps
  int eval_steps = 2000;

  void validate() const;
  /// train.total_steps after budget scaling.
  long scaled_total_steps() const;
};

/// The file form, before path resolution; also the hashing input of manifests.
Json to_json(const RunConfig& config);
RunConfig run_config_from_json(const Json& j, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Fingerprint of every field that influences results.
std::string config_hash(const RunConfig& config);

enum class SweepStrategy { grid, random };

/// Parameter axes are dotted paths into the run-config document, e.g.
/// "reward.k_ph" or "train.learning_rate".
struct SweepSpec {
  std::vector<std::pair<std::string, std::vector<double>>> axes;
  SweepStrategy strategy = SweepStrategy::grid;
  int random_trials = 0;
  std::uint64_t seed = 1;
  double budget_fraction = 0.5;  // of the scaled training budget
  std::string objective = "train";  // train | estimate
  std::filesystem::path trace;      // error trace for the estimate objective

  void validate() const;
};

SweepSpec sweep_spec_from_json(const Json& j, const std::filesystem::path& base_dir = {});
SweepSpec load_sweep_spec(const std::filesystem::path& path);

/// One assignment per trial, in trial order.
std::vector<std::vector<double>> sweep_trials(const SweepSpec& spec);

/// Copy of `config` with the dotted path set to `value`.
Json apply_override(const Json& config, const std::string& path, double value);

}  // namespace signmimic
