#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <set>

#include "signmimic/commands.hpp"
#include "signmimic/trainer.hpp"
#include "support/oracles.hpp"

using namespace signmimic;
namespace fs = std::filesystem;

namespace {

struct Toy {
  RunConfig config;
  std::shared_ptr<const SkeletonModel> model;
  std::shared_ptr<const ReferenceTrack> track;

  Toy() : config(load_run_config(oracle::config_path("toy.json"))) {
    model = std::make_shared<const SkeletonModel>(load_skeleton_file(config.model));
    track = std::make_shared<const ReferenceTrack>(
        ReferenceTrack::build(*model, load_clip(*model, config.clips.at(0)), config.sim.control_rate()));
  }

  EnvFactory factory() const { return make_env_factory(model, track, config); }

  TrainConfig small(std::uint64_t seed = 3) const {
    TrainConfig t = config.train;
    t.hidden = {16, 16};
    t.n_steps = 32;
    t.num_envs = 4;
    t.batch_size = 64;
    t.n_epochs = 2;
    t.total_steps = 32 * 4 * 6;
    t.checkpoint_every = 2;
    t.seed = seed;
    return t;
  }
};

const Toy& toy() {
  static Toy t;
  return t;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("signmimic_unit_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("curve header") {
  CHECK(curve_csv_header() == std::vector<std::string>{"step", "reward_mean", "reward_std", "surrogate_loss",
                                                       "value_loss", "kl", "clip_fraction"});
  const std::string csv = curve_csv({});
  CHECK(csv == "step,reward_mean,reward_std,surrogate_loss,value_loss,kl,clip_fraction\n");
}

TEST_CASE("one curve row per update") {
  const TrainConfig cfg = toy().small();
  long seen = 0;
  TrainOptions opt;
  opt.on_update = [&](const CurveRow& r) {
    ++seen;
    CHECK(r.step == seen * cfg.steps_per_update());
    CHECK(r.reward_mean >= 0.0);
    CHECK(r.reward_mean <= 1.0);
  };
  const TrainResult r = train(toy().factory(), cfg, opt);
  CHECK(r.curve.size() == static_cast<std::size_t>(cfg.total_steps / cfg.steps_per_update()));
  CHECK(seen == 6);
  CHECK(r.complete);
}

TEST_CASE("training is deterministic and independent of the worker count") {
  const TrainConfig cfg = toy().small();
  TrainOptions one;
  TrainOptions three;
  three.threads = 3;
  const std::string a = curve_csv(train(toy().factory(), cfg, one).curve);
  const std::string b = curve_csv(train(toy().factory(), cfg, one).curve);
  const std::string c = curve_csv(train(toy().factory(), cfg, three).curve);
  CHECK(a == b);
  CHECK(a == c);
  const std::string d = curve_csv(train(toy().factory(), toy().small(4), one).curve);
  CHECK(a != d);
}

TEST_CASE("resume after an interruption reproduces the uninterrupted run") {
  const TrainConfig cfg = toy().small();
  const fs::path full_dir = scratch("full");
  const fs::path cut_dir = scratch("cut");
  TrainOptions full;
  full.out_dir = full_dir;
  full.fingerprint = "fp";
  const TrainResult reference = train(toy().factory(), cfg, full);

  TrainOptions cut = full;
  cut.out_dir = cut_dir;
  cut.resume = true;
  cut.stop_after_updates = 3;
  const TrainResult partial = train(toy().factory(), cfg, cut);
  CHECK(partial.updates_done == 3);
  CHECK_FALSE(partial.complete);
  CHECK(fs::exists(cut_dir / "checkpoints" / "ckpt_2.json"));
  CHECK_FALSE(fs::exists(cut_dir / "checkpoints" / "ckpt_4.json"));

  cut.stop_after_updates = -1;
  const TrainResult resumed = train(toy().factory(), cfg, cut);
  CHECK(resumed.complete);
  CHECK(read_text(cut_dir / "curve.csv") == read_text(full_dir / "curve.csv"));
  CHECK(flatten(resumed.params) == flatten(reference.params));

  const Checkpoint ck = load_checkpoint(cut_dir / "checkpoints" / "latest.json");
  CHECK(ck.update == 6);
  CHECK(ck.fingerprint == "fp");
  CHECK(flatten(ck.params) == flatten(reference.params));

  SUBCASE("mismatched fingerprint or config is refused") {
    TrainOptions other = cut;
    other.fingerprint = "other";
    CHECK_THROWS_AS(train(toy().factory(), cfg, other), ConfigError);
    TrainConfig changed = cfg;
    changed.learning_rate *= 2.0;
    CHECK_THROWS_AS(train(toy().factory(), changed, cut), ConfigError);
  }
}

TEST_CASE("environment seeds are distinct") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 1; s <= 20; ++s) {
    for (int e = 0; e < 16; ++e) seen.insert(env_seed(s, e));
  }
  CHECK(seen.size() == 320);
  CHECK(env_seed(5, 2) == env_seed(5, 2));
}

TEST_CASE("parallel_for visits every index once") {
  for (int threads : {1, 2, 5, 16}) {
    std::vector<std::atomic<int>> hits(37);
    parallel_for(37, threads, [&](int i) { hits[i]++; });
    for (auto& h : hits) CHECK(h.load() == 1);
  }
}

}  // TEST_SUITE
