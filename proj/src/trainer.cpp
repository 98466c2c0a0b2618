#include "signmimic/trainer.hpp"

#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "signmimic/error.hpp"

namespace signmimic {

namespace {

constexpr int kCheckpointSchema = 1;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::string rng_to_string(const std::mt19937_64& rng) {
  std::ostringstream s;
  s << rng;
  return s.str();
}

void rng_from_string(std::mt19937_64& rng, const std::string& text) {
  std::istringstream s(text);
  s >> rng;
  if (!s) throw ParseError("checkpoint.rng: malformed generator state");
}

Json curve_row_json(const CurveRow& r) {
  return {{"step", r.step},
          {"reward_mean", r.reward_mean},
          {"reward_std", r.reward_std},
          {"surrogate_loss", r.stats.surrogate_loss},
          {"value_loss", r.stats.value_loss},
          {"kl", r.stats.kl},
          {"clip_fraction", r.stats.clip_fraction}};
}

CurveRow curve_row_from_json(const Json& j) {
  CurveRow r;
  r.step = j.at("step").get<long>();
  r.reward_mean = j.at("reward_mean").get<double>();
  r.reward_std = j.at("reward_std").get<double>();
  r.stats.surrogate_loss = j.at("surrogate_loss").get<double>();
  r.stats.value_loss = j.at("value_loss").get<double>();
  r.stats.kl = j.at("kl").get<double>();
  r.stats.clip_fraction = j.at("clip_fraction").get<double>();
  return r;
}

}  // namespace

std::uint64_t env_seed(std::uint64_t seed, int index) {
  return splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(index + 1));
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  const int workers = std::max(1, std::min(threads, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = w; i < count; i += workers) fn(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

const std::vector<std::string>& curve_csv_header() {
  static const std::vector<std::string> header = {"step", "reward_mean", "reward_std", "surrogate_loss",
                                                  "value_loss", "kl", "clip_fraction"};
  return header;
}

std::string curve_csv(const std::vector<CurveRow>& rows) {
  CsvWriter csv(curve_csv_header());
  for (const auto& r : rows) {
    csv.add_row({static_cast<double>(r.step), r.reward_mean, r.reward_std, r.stats.surrogate_loss,
                 r.stats.value_loss, r.stats.kl, r.stats.clip_fraction});
  }
  return csv.str();
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const Json j = Json::parse(read_text(path), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ParseError(path.string() + ": not a JSON document");
  if (j.value("format", "") != "signmimic-checkpoint") throw ParseError(path.string() + ": not a checkpoint");
  if (j.value("schema_version", 0) != kCheckpointSchema) {
    throw ParseError(path.string() + ": unsupported checkpoint schema_version");
  }
  Checkpoint c;
  c.update = j.at("update").get<long>();
  c.config = train_config_from_json(j.at("train_config"));
  c.fingerprint = j.at("fingerprint").get<std::string>();
  c.params = actor_critic_from_json(j.at("params"));
  return c;
}

TrainResult train(const EnvFactory& factory, const TrainConfig& config, const TrainOptions& options) {
  config.validate();
  const int num_envs = config.num_envs;
  std::vector<std::unique_ptr<SignEnv>> envs;
  envs.reserve(num_envs);
  for (int e = 0; e < num_envs; ++e) envs.push_back(factory(e));
  const int obs_dim = envs.front()->observation_size();
  const int act_dim = envs.front()->action_size();
  for (const auto& env : envs) {
    if (env->observation_size() != obs_dim || env->action_size() != act_dim) {
      throw ConfigError("train: environments disagree on observation/action sizes");
    }
  }

  std::mt19937_64 rng(config.seed);
  TrainResult result;
  result.params = make_actor_critic(obs_dim, act_dim, config.hidden, config.activation, config.log_std,
                                    config.output_scale, rng);
  AdamState adam;
  Eigen::MatrixXd obs(obs_dim, num_envs);
  for (int e = 0; e < num_envs; ++e) obs.col(e) = envs[e]->reset(env_seed(config.seed, e));

  const std::filesystem::path ckpt_dir = options.out_dir.empty() ? std::filesystem::path{} : options.out_dir / "checkpoints";
  const Json config_json = to_json(config);
  long start_update = 0;
  if (options.resume && !options.out_dir.empty() && std::filesystem::exists(ckpt_dir / "latest.json")) {
    const Json j = Json::parse(read_text(ckpt_dir / "latest.json"));
    if (j.at("train_config") != config_json) throw ConfigError("resume: checkpoint was written with a different config");
    if (j.at("fingerprint").get<std::string>() != options.fingerprint) {
      throw ConfigError("resume: checkpoint belongs to a different model or clip");
    }
    start_update = j.at("update").get<long>();
    result.params = actor_critic_from_json(j.at("params"));
    adam = adam_from_json(j.at("adam"));
    rng_from_string(rng, j.at("rng").get<std::string>());
    const Json& env_states = j.at("envs");
    if (static_cast<int>(env_states.size()) != num_envs) throw ConfigError("resume: environment count differs");
    for (int e = 0; e < num_envs; ++e) {
      envs[e]->load_state(env_states[e]);
      obs.col(e) = envs[e]->observation();
    }
    for (const auto& row : j.at("curve")) result.curve.push_back(curve_row_from_json(row));
  }

  auto write_checkpoint = [&](long update) {
    if (options.out_dir.empty()) return;
    Json j;
    j["format"] = "signmimic-checkpoint";
    j["schema_version"] = kCheckpointSchema;
    j["update"] = update;
    j["step"] = update * config.steps_per_update();
    j["train_config"] = config_json;
    j["fingerprint"] = options.fingerprint;
    j["params"] = to_json(result.params);
    j["adam"] = to_json(adam);
    j["rng"] = rng_to_string(rng);
    Json env_states = Json::array();
    for (const auto& env : envs) env_states.push_back(env->save_state());
    j["envs"] = std::move(env_states);
    Json curve = Json::array();
    for (const auto& r : result.curve) curve.push_back(curve_row_json(r));
    j["curve"] = std::move(curve);
    const std::string text = j.dump();
    write_text(ckpt_dir / ("ckpt_" + std::to_string(update) + ".json"), text);
    write_text(ckpt_dir / "latest.json", text);
  };

  RolloutBuffer buffer;
  std::vector<StepResult> results(num_envs);
  const long total_updates = config.num_updates();
  long update = start_update;
  for (; update < total_updates; ++update) {
    if (options.stop_after_updates >= 0 && update - start_update >= options.stop_after_updates) break;
    buffer.allocate(config.n_steps, num_envs, obs_dim, act_dim);
    for (int t = 0; t < config.n_steps; ++t) {
      const PolicyOutput pi = policy_forward(result.params.policy, obs, &rng);
      const Eigen::VectorXd values = value_forward(result.params.value, obs);
      parallel_for(num_envs, options.threads, [&](int e) { results[e] = envs[e]->step(pi.action.col(e)); });

      std::vector<int> truncated;
      for (int e = 0; e < num_envs; ++e) {
        const Eigen::Index i = buffer.index(t, e);
        buffer.observations.col(i) = obs.col(e);
        buffer.actions.col(i) = pi.action.col(e);
        buffer.values(i) = values(e);
        buffer.log_probs(i) = pi.log_prob(e);
        buffer.rewards(i) = results[e].reward;
        buffer.dones[i] = results[e].done;
        buffer.terminated[i] = results[e].terminated;
        obs.col(e) = results[e].observation;
        if (results[e].done && !results[e].terminated) truncated.push_back(e);
      }
      if (!truncated.empty()) {
        Eigen::MatrixXd final_obs(obs_dim, static_cast<Eigen::Index>(truncated.size()));
        for (std::size_t k = 0; k < truncated.size(); ++k) final_obs.col(k) = obs.col(truncated[k]);
        const Eigen::VectorXd v = value_forward(result.params.value, final_obs);
        for (std::size_t k = 0; k < truncated.size(); ++k) buffer.truncation_values(buffer.index(t, truncated[k])) = v(k);
      }
      for (int e = 0; e < num_envs; ++e) {
        if (results[e].done) obs.col(e) = envs[e]->reset();
      }
    }
    buffer.last_values = value_forward(result.params.value, obs);

    const Advantages adv = returns_and_advantages(buffer, config.gamma, config.advantage_mode, config.gae_lambda,
                                                  config.normalize_advantages);
    CurveRow row;
    row.step = (update + 1) * config.steps_per_update();
    row.reward_mean = buffer.rewards.mean();
    row.reward_std = std::sqrt((buffer.rewards.array() - row.reward_mean).square().mean());
    row.stats = ppo_update(result.params, adam, buffer, adv, config, rng);
    result.curve.push_back(row);
    if (options.on_update) options.on_update(row);

    if (!options.out_dir.empty()) write_text(options.out_dir / "curve.csv", curve_csv(result.curve));
    if ((update + 1) % config.checkpoint_every == 0 || update + 1 == total_updates) write_checkpoint(update + 1);
  }
  result.updates_done = update;
  result.complete = update == total_updates;
  if (!options.out_dir.empty()) write_text(options.out_dir / "curve.csv", curve_csv(result.curve));
  return result;
}

}  // namespace signmimic
