#include <doctest.h>

#include <filesystem>

#include "signmimic/commands.hpp"
#include "signmimic/retarget.hpp"
#include "support/oracles.hpp"

using namespace signmimic;
namespace fs = std::filesystem;

TEST_SUITE("retarget") {

TEST_CASE("kinematic replay earns one per step") {
  const auto model = std::make_shared<const SkeletonModel>(load_skeleton_file(oracle::data_path("signer.model")));
  const MotionClip clip = load_clip(*model, oracle::data_path("clips/69402.clip"));
  const CeilingReport k = ceiling(model, clip, RewardConfig{}, CeilingMode::kinematic, 500);
  REQUIRE(k.series.size() == 500);
  for (const auto& b : k.series) CHECK(b.total == 1.0);
  CHECK(k.cumulative == 500.0);
  CHECK(k.mean.total == 1.0);
}

TEST_CASE("pd tracking stays below the kinematic bound") {
  const auto model = std::make_shared<const SkeletonModel>(load_skeleton_file(oracle::data_path("signer.model")));
  const MotionClip clip = load_clip(*model, oracle::data_path("clips/69546.clip"));
  const CeilingReport pd = ceiling(model, clip, RewardConfig{}, CeilingMode::pd_tracked, 500);
  CHECK(pd.cumulative < 500.0);
  CHECK(pd.cumulative > 450.0);
  double sum = 0.0, pb = 0.0;
  for (const auto& b : pd.series) {
    sum += b.total;
    pb += b.r_pb;
  }
  CHECK(pd.cumulative == doctest::Approx(sum).epsilon(1e-14));
  CHECK(pd.mean.r_pb == doctest::Approx(pb / 500).epsilon(1e-14));
  CHECK(pd.mean.r_r == 1.0);
}

TEST_CASE("default hand factors collapse the pd-tracked reward on the jittered capture") {
  const auto model = std::make_shared<const SkeletonModel>(load_skeleton_file(oracle::data_path("signer.model")));
  const MotionClip clip = load_clip(*model, oracle::data_path("clips/tuning.clip"));
  const CeilingReport tuned = ceiling(model, clip, RewardConfig{}, CeilingMode::pd_tracked, 200);
  const CeilingReport naive = ceiling(model, clip, default_factor_config(), CeilingMode::pd_tracked, 200);
  CHECK(naive.mean.total < 1e-3);
  CHECK(tuned.mean.total > naive.mean.total);
}

TEST_CASE("evaluation episodes loop the clip") {
  const EpisodeConfig e = evaluation_episode(2000);
  CHECK(e.max_steps == 2000);
  CHECK_FALSE(e.reference_state_init);
  CHECK(e.early_stop_reward == 0.0);
  CHECK(e.residual_actions);
  CHECK_FALSE(evaluation_episode(10, false).residual_actions);
}

TEST_CASE("reports") {
  const auto model = std::make_shared<const SkeletonModel>(load_skeleton_file(oracle::data_path("toy_arm.model")));
  const MotionClip clip = load_clip(*model, oracle::data_path("clips/toy_sine.clip"));
  const CeilingReport r = ceiling(model, clip, RewardConfig{}, CeilingMode::pd_tracked, 7);
  const std::string csv = report_csv(r);
  CHECK(csv.rfind("step,r_pb,r_ph,r_vb,r_vh,r_e,r_r,total,eps_pb,eps_ph,eps_vb,eps_vh,eps_e,eps_r\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 8);
  const Json j = report_json(r);
  CHECK(j.at("steps") == 7);
  CHECK(j.at("cumulative").get<double>() == r.cumulative);
  CHECK(j.at("mean").contains("r_pb"));
  CHECK(j.at("mean").contains("eps_pb"));
  CHECK(to_string(ceiling_mode_from_string("pd_tracked")) == "pd_tracked");
  CHECK_THROWS(ceiling_mode_from_string("ideal"));
}

TEST_CASE("evaluating the reference pseudo-checkpoint") {
  const RunConfig cfg = load_run_config(oracle::config_path("final.json"));
  const fs::path dir = fs::temp_directory_path() / "signmimic_unit_eval";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_reference_checkpoint(dir / "reference.json");
  const RolloutReport a = cmd_eval(dir / "reference.json", cfg, cfg.clips.at(0), 2000, dir);
  CHECK(a.cumulative == 2000.0);
  CHECK(fs::exists(dir / "eval.json"));
  CHECK(fs::exists(dir / "eval.csv"));
  const RolloutReport b = cmd_eval(dir / "reference.json", cfg, cfg.clips.at(0), 2000, {});
  CHECK(report_csv(a) == report_csv(b));
  write_text(dir / "junk.json", "{\"hello\": 1}");
  CHECK_THROWS_AS(cmd_eval(dir / "junk.json", cfg, cfg.clips.at(0), 10, {}), ConfigError);
}

TEST_CASE("a trained toy checkpoint evaluates deterministically below the kinematic bound") {
  RunConfig cfg = load_run_config(oracle::config_path("toy.json"));
  cfg.train.hidden = {16};
  cfg.train.n_steps = 32;
  cfg.train.num_envs = 2;
  cfg.train.batch_size = 32;
  cfg.train.total_steps = 128;
  cfg.train.checkpoint_every = 1;
  cfg.budget_scale = 1.0;
  cfg.seeds = {1};
  const fs::path dir = fs::temp_directory_path() / "signmimic_unit_toy_eval";
  fs::remove_all(dir);
  cfg.out_dir = dir;
  const auto runs = cmd_train(cfg);
  REQUIRE(runs.size() == 1);
  const fs::path ckpt = runs[0].dir / "checkpoints" / "latest.json";
  const RolloutReport a = cmd_eval(ckpt, cfg, cfg.clips.at(0), 300, {});
  const RolloutReport b = cmd_eval(ckpt, cfg, cfg.clips.at(0), 300, {});
  CHECK(report_csv(a) == report_csv(b));
  CHECK(a.cumulative <= 300.0);
  CHECK(a.cumulative > 0.0);
}

}  // TEST_SUITE
