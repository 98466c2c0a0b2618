#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "signmimic/env.hpp"
#include "signmimic/ppo.hpp"

namespace signmimic {

/// Builds environment `index` of a run. Must be deterministic in its argument.
using EnvFactory = std::function<std::unique_ptr<SignEnv>(int index)>;

struct CurveRow {
  long step = 0;
  double reward_mean = 0.0;  // mean per-step reward over the rollout
  double reward_std = 0.0;
  UpdateStats stats;
};

const std::vector<std::string>& curve_csv_header();
std::string curve_csv(const std::vector<CurveRow>& rows);

struct TrainOptions {
  std::filesystem::path out_dir;  // empty: keep everything in memory
  bool resume = false;            // continue from out_dir/checkpoints/latest.json if present
  long stop_after_updates = -1;   // stop early (simulated interruption); -1 runs to completion
  int threads = 1;                // environment stepping workers
  std::string fingerprint;        // model and clip hashes, stored in checkpoints
  std::function<void(const CurveRow&)> on_update;
};

struct TrainResult {
  std::vector<CurveRow> curve;
  ActorCritic params;
  long updates_done = 0;
  bool complete = false;
};

/// Alternates rollout collection over `config.num_envs` environments and PPO
/// updates. Results depend only on (config, factory), not on `threads`.
/// Artifacts: curve.csv, checkpoints/ckpt_<update>.json, checkpoints/latest.json.
TrainResult train(const EnvFactory& factory, const TrainConfig& config, const TrainOptions& options = {});

struct Checkpoint {
  long update = 0;
  TrainConfig config;
  std::string fingerprint;
  ActorCritic params;
};

Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Seed for environment `index` of a run seeded with `seed`.
std::uint64_t env_seed(std::uint64_t seed, int index);

/// Runs `fn(i)` for i in [0, count) on up to `threads` threads.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

}  // namespace signmimic
