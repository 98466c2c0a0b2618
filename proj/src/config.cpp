#include "signmimic/config.hpp"

#include <cmath>
#include <random>
#include <set>

#include "signmimic/error.hpp"

namespace signmimic {

namespace {

constexpr int kConfigSchema = 1;

std::filesystem::path resolve_path(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

Json parse_document(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConfigError(path.string() + ": not valid JSON");
  return j;
}

}  // namespace

void RunConfig::validate() const {
  if (model.empty()) throw ConfigError("config.model: missing");
  if (!std::filesystem::exists(model)) throw ConfigError("config.model: file not found: " + model.string());
  if (clips.empty()) throw ConfigError("config.clips: need at least one clip");
  for (const auto& c : clips) {
    if (!std::filesystem::exists(c)) throw ConfigError("config.clips: file not found: " + c.string());
  }
  if (seeds.empty()) throw ConfigError("config.seeds: need at least one seed");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw ConfigError("config.seeds: seeds must be distinct");
  }
  if (!(budget_scale > 0.0)) throw ConfigError("config.budget_scale must be > 0");
  if (eval_steps <= 0) throw ConfigError("config.eval_steps must be > 0");
  if (!(sim.dt > 0.0) || sim.substeps <= 0) throw ConfigError("config.sim: dt and substeps must be positive");
  TrainConfig scaled = train;
  scaled.total_steps = scaled_total_steps();
  scaled.validate();
}

long RunConfig::scaled_total_steps() const {
  return std::lround(static_cast<double>(train.total_steps) * budget_scale);
}

Json to_json(const RunConfig& c) {
  Json j;
  j["schema_version"] = kConfigSchema;
  j["model"] = c.model.string();
  Json clips = Json::array();
  for (const auto& p : c.clips) clips.push_back(p.string());
  j["clips"] = std::move(clips);
  j["reward"] = to_json(c.reward);
  j["train"] = to_json(c.train);
  j["episode"] = {{"max_steps", c.episode.max_steps},
                  {"early_stop_reward", c.episode.early_stop_reward},
                  {"reference_state_init", c.episode.reference_state_init},
                  {"residual_actions", c.episode.residual_actions}};
  j["sim"] = {{"dt", c.sim.dt}, {"substeps", c.sim.substeps}};
  j["out"] = c.out_dir.string();
  j["seeds"] = c.seeds;
  j["budget_scale"] = c.budget_scale;
  j["eval_steps"] = c.eval_steps;
  return j;
}

RunConfig run_config_from_json(const Json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  if (j.value("schema_version", 0) != kConfigSchema) throw ConfigError("config.schema_version: expected 1");
  RunConfig c;
  try {
    if (j.contains("model")) c.model = resolve_path(base_dir, j["model"].get<std::string>());
    if (j.contains("clips")) {
      for (const auto& p : j["clips"]) c.clips.push_back(resolve_path(base_dir, p.get<std::string>()));
    }
    if (j.contains("reward")) c.reward = reward_config_from_json(j["reward"]);
    if (j.contains("train")) c.train = train_config_from_json(j["train"]);
    if (j.contains("episode")) {
      const Json& e = j["episode"];
      c.episode.max_steps = e.value("max_steps", c.episode.max_steps);
      c.episode.early_stop_reward = e.value("early_stop_reward", c.episode.early_stop_reward);
      c.episode.reference_state_init = e.value("reference_state_init", c.episode.reference_state_init);
      c.episode.residual_actions = e.value("residual_actions", c.episode.residual_actions);
    }
    if (j.contains("sim")) {
      c.sim.dt = j["sim"].value("dt", c.sim.dt);
      c.sim.substeps = j["sim"].value("substeps", c.sim.substeps);
    }
    if (j.contains("out")) c.out_dir = resolve_path(base_dir, j["out"].get<std::string>());
    if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    if (j.contains("budget_scale")) c.budget_scale = j["budget_scale"].get<double>();
    if (j.contains("eval_steps")) c.eval_steps = j["eval_steps"].get<int>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return run_config_from_json(parse_document(path), path.parent_path());
}

std::string config_hash(const RunConfig& config) {
  Json j = to_json(config);
  j.erase("out");
  return hex64(fnv1a(j.dump()));
}

void SweepSpec::validate() const {
  if (axes.empty()) throw ConfigError("sweep.axes: need at least one axis");
  for (const auto& [name, values] : axes) {
    if (values.empty()) throw ConfigError("sweep.axes." + name + ": empty value list");
    for (double v : values) {
      if (!std::isfinite(v)) throw ConfigError("sweep.axes." + name + ": values must be finite");
    }
    if (name.find('.') == std::string::npos) throw ConfigError("sweep.axes." + name + ": expected section.key");
  }
  if (strategy == SweepStrategy::random && random_trials <= 0) throw ConfigError("sweep.random: trials must be > 0");
  if (!(budget_fraction > 0.0 && budget_fraction <= 1.0)) throw ConfigError("sweep.budget_fraction must lie in (0, 1]");
  if (objective != "train" && objective != "estimate") throw ConfigError("sweep.objective: expected train or estimate");
  if (objective == "estimate" && trace.empty()) throw ConfigError("sweep.trace: required for the estimate objective");
}

SweepSpec sweep_spec_from_json(const Json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("sweep: expected a JSON object");
  SweepSpec s;
  try {
    const Json& axes = j.at("axes");
    if (!axes.is_array()) throw ConfigError("sweep.axes: expected an array of {name, values}");
    for (const auto& a : axes) s.axes.emplace_back(a.at("name").get<std::string>(), a.at("values").get<std::vector<double>>());
    const Json& strategy = j.value("strategy", Json("grid"));
    if (strategy.is_string() && strategy.get<std::string>() == "grid") {
      s.strategy = SweepStrategy::grid;
    } else if (strategy.is_object() && strategy.contains("random")) {
      s.strategy = SweepStrategy::random;
      s.random_trials = strategy["random"].get<int>();
    } else {
      throw ConfigError("sweep.strategy: expected \"grid\" or {\"random\": n}");
    }
    s.seed = j.value("seed", s.seed);
    s.budget_fraction = j.value("budget_fraction", s.budget_fraction);
    s.objective = j.value("objective", s.objective);
    if (j.contains("trace")) s.trace = resolve_path(base_dir, j["trace"].get<std::string>());
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("sweep: ") + e.what());
  }
  s.validate();
  return s;
}

SweepSpec load_sweep_spec(const std::filesystem::path& path) {
  return sweep_spec_from_json(parse_document(path), path.parent_path());
}

std::vector<std::vector<double>> sweep_trials(const SweepSpec& spec) {
  spec.validate();
  std::vector<std::vector<double>> trials;
  if (spec.strategy == SweepStrategy::grid) {
    std::vector<std::size_t> idx(spec.axes.size(), 0);
    while (true) {
      std::vector<double> t;
      for (std::size_t a = 0; a < spec.axes.size(); ++a) t.push_back(spec.axes[a].second[idx[a]]);
      trials.push_back(std::move(t));
      // Last axis varies fastest.
      std::size_t a = spec.axes.size();
      while (a > 0) {
        --a;
        if (++idx[a] < spec.axes[a].second.size()) break;
        idx[a] = 0;
        if (a == 0) return trials;
      }
    }
  }
  std::mt19937_64 rng(spec.seed);
  for (int n = 0; n < spec.random_trials; ++n) {
    std::vector<double> t;
    for (const auto& [name, values] : spec.axes) {
      std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
      t.push_back(values[pick(rng)]);
    }
    trials.push_back(std::move(t));
  }
  return trials;
}

Json apply_override(const Json& config, const std::string& path, double value) {
  Json out = config;
  Json* node = &out;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError("sweep axis '" + path + "': empty path component");
    if (dot == std::string::npos) {
      if (!node->contains(key) || !(*node)[key].is_number()) {
        throw ConfigError("sweep axis '" + path + "': no numeric field '" + key + "' in the run config");
      }
      if ((*node)[key].is_number_integer()) {
        const double r = std::round(value);
        if (r != value) throw ConfigError("sweep axis '" + path + "': expects an integer");
        (*node)[key] = static_cast<long long>(r);
      } else {
        (*node)[key] = value;
      }
      return out;
    }
    if (!node->contains(key) || !(*node)[key].is_object()) {
      throw ConfigError("sweep axis '" + path + "': no section '" + key + "' in the run config");
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

}  // namespace signmimic
