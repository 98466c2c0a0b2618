#include <doctest.h>

#include <random>

#include "signmimic/motion.hpp"
#include "support/oracles.hpp"

using namespace signmimic;

namespace {

Json zero_frame(bool hands) {
  Json f;
  f["pred_body_pose"] = std::vector<double>(3 * kBodySourceJoints, 0.0);
  if (hands) {
    f["pred_lhand_pose"] = std::vector<double>(3 * kHandSourceJoints, 0.0);
    f["pred_rhand_pose"] = std::vector<double>(3 * kHandSourceJoints, 0.0);
  }
  return f;
}

int body_index(std::string_view name) {
  const auto& names = body_source_names();
  for (int i = 0; i < kBodySourceJoints; ++i) {
    if (names[i] == name) return i;
  }
  return -1;
}

Eigen::Matrix3d rodrigues(const Eigen::Vector3d& rv) {
  const double t = rv.norm();
  if (t == 0.0) return Eigen::Matrix3d::Identity();
  const Eigen::Vector3d k = rv / t;
  Eigen::Matrix3d kx;
  kx << 0, -k.z(), k.y(), k.z(), 0, -k.x(), -k.y(), k.x(), 0;
  return Eigen::Matrix3d::Identity() + std::sin(t) * kx + (1 - std::cos(t)) * kx * kx;
}

// Estimator frame (x left, y up, z forward) to model frame (x forward, y up, z right).
Eigen::Matrix3d frame_change() {
  Eigen::Matrix3d c;
  c << 0, 0, 1, 0, 1, 0, -1, 0, 0;
  return c;
}

}  // namespace

TEST_SUITE("motion") {

TEST_CASE("all-zero capture converts to rest poses") {
  const SkeletonModel m = load_skeleton_file(oracle::data_path("signer.model"));
  Json doc{{"fps", 30.0}, {"frames", Json::array()}};
  for (int i = 0; i < 4; ++i) doc["frames"].push_back(zero_frame(true));
  const ConversionReport r = convert(parse_capture(doc.dump()), m);
  REQUIRE(r.clip.size() == 4);
  const PoseD rest = rest_pose(m);
  for (const auto& p : r.clip.frames) {
    for (int j = 0; j < m.num_joints(); ++j) {
      CHECK(quat_geodesic(p.rotations[j], rest.rotations[j]) <= 1e-12);
      CHECK(p.angles[j] == doctest::Approx(rest.angles[j]));
    }
  }
}

TEST_CASE("leg motion is dropped") {
  const SkeletonModel m = load_skeleton_file(oracle::data_path("signer.model"));
  Json still{{"fps", 30.0}, {"frames", Json::array()}};
  Json legs = still;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.8, 0.8);
  for (int i = 0; i < 5; ++i) {
    still["frames"].push_back(zero_frame(true));
    Json f = zero_frame(true);
    for (const char* name : {"L_hip", "R_hip", "L_knee", "R_knee", "L_ankle", "R_ankle", "L_foot", "R_foot"}) {
      const int k = body_index(name);
      REQUIRE(k >= 0);
      for (int a = 0; a < 3; ++a) f["pred_body_pose"][3 * k + a] = u(rng);
    }
    legs["frames"].push_back(f);
  }
  const MotionClip a = convert(parse_capture(still.dump()), m).clip;
  const MotionClip b = convert(parse_capture(legs.dump()), m).clip;
  CHECK(clip_to_json(m, a) == clip_to_json(m, b));
}

TEST_CASE("bundled capture frames match a matrix conversion oracle") {
  const SkeletonModel m = load_skeleton_file(oracle::data_path("signer.model"));
  const SourceCapture cap = load_capture(oracle::data_path("captures/tuning.json"));
  REQUIRE(cap.frames.size() == 60);
  ConvertOptions opt;
  opt.target_rate = 0.0;
  const MotionClip clip = convert(cap, m, opt).clip;
  REQUIRE(clip.size() == 60);
  CHECK(m.num_joints() == 45);
  const Eigen::Matrix3d c = frame_change();
  const int chest = m.joint_index("chest");
  const int elbow = m.joint_index("right_elbow");
  for (int i : {0, 17, 59}) {
    const auto& body = cap.frames[i].body;
    const Eigen::Matrix3d spine = rodrigues(body[body_index("spine1")]) * rodrigues(body[body_index("spine2")]) *
                                  rodrigues(body[body_index("spine3")]);
    const Eigen::Matrix3d expected_chest = c * spine * c.transpose();
    CHECK((clip.frames[i].rotations[chest].toRotationMatrix() - expected_chest).norm() < 1e-10);

    // The elbow hinge keeps the twist about its axis (model y).
    const Eigen::Quaterniond q(c * rodrigues(body[body_index("R_elbow")]) * c.transpose());
    const double s = q.w() < 0 ? -1.0 : 1.0;
    const double twist = 2.0 * std::atan2(s * q.y(), s * q.w());
    CHECK(clip.frames[i].angles[elbow] == doctest::Approx(std::clamp(twist, 0.0, 2.6)).epsilon(1e-10));
  }
}

TEST_CASE("non-finite frames are rejected and reported") {
  const SkeletonModel m = load_skeleton_file(oracle::data_path("signer.model"));
  Json doc{{"fps", 30.0}, {"frames", Json::array()}};
  for (int i = 0; i < 5; ++i) doc["frames"].push_back(zero_frame(true));
  doc["frames"][2]["pred_body_pose"][7] = nullptr;
  const ConversionReport r = convert(parse_capture(doc.dump()), m);
  CHECK(r.rejected_frames == std::vector<int>{2});
  CHECK(r.clip.size() == 4);
}

TEST_CASE("a single detected hand is mirrored onto the other") {
  const SkeletonModel m = load_skeleton_file(oracle::data_path("signer.model"));
  Json doc{{"fps", 30.0}, {"frames", Json::array()}};
  for (int i = 0; i < 3; ++i) {
    Json f = zero_frame(false);
    std::vector<double> hand(3 * kHandSourceJoints, 0.0);
    for (int k = 0; k < kHandSourceJoints; ++k) hand[3 * k + 2] = 0.1 * (k % 4) + 0.05 * i;
    f["pred_rhand_pose"] = hand;
    doc["frames"].push_back(f);
  }
  const ConversionReport r = convert(parse_capture(doc.dump()), m);
  CHECK(r.mirrored_left);
  CHECK_FALSE(r.mirrored_right);
  // Finger hinges are mirror images, so the two hands take equal angles.
  int checked = 0;
  for (const auto& p : r.clip.frames) {
    for (int j = 0; j < m.num_joints(); ++j) {
      const std::string& name = m.joints[j].name;
      if (name.rfind("right_", 0) != 0 || !m.actuated(j) || name == "right_shoulder" || name == "right_elbow" ||
          name == "right_wrist") {
        continue;
      }
      CHECK(p.angles[mirrored_joint(m, j)] == doctest::Approx(p.angles[j]).epsilon(1e-12));
      if (p.angles[j] != 0.0) ++checked;
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("ingestion errors") {
  const SkeletonModel m = load_skeleton_file(oracle::data_path("signer.model"));
  CHECK_THROWS_AS(parse_capture("{\"fps\": 30, \"frames\": [{\"pred_body_pose\": [0, 0]}]}"), ParseError);
  Json no_hands{{"fps", 30.0}, {"frames", {zero_frame(false), zero_frame(false)}}};
  CHECK_THROWS_AS(convert(parse_capture(no_hands.dump()), m), IngestionError);
  Json one{{"fps", 30.0}, {"frames", {zero_frame(true)}}};
  CHECK_THROWS_AS(convert(parse_capture(one.dump()), m), IngestionError);
}

TEST_CASE("resampling") {
  const SkeletonModel m = load_skeleton_file(oracle::data_path("signer.model"));
  const MotionClip clip = load_clip(m, oracle::data_path("clips/52861.clip"));

  SUBCASE("identity rate") {
    const MotionClip same = resample(clip, clip.rate);
    REQUIRE(same.size() == clip.size());
    for (int i = 0; i < clip.size(); ++i) {
      for (int j = 0; j < m.num_joints(); ++j) {
        CHECK(quat_geodesic(same.frames[i].rotations[j], clip.frames[i].rotations[j]) < 1e-12);
        CHECK(std::abs(same.frames[i].angles[j] - clip.frames[i].angles[j]) < 1e-12);
      }
    }
  }

  SUBCASE("slerp midpoint") {
    const SkeletonModel chain = load_skeleton(R"({"schema_version": 1,
      "links": [{"name": "a", "parent": null, "mass": 1}, {"name": "b", "parent": "a", "mass": 1}],
      "joints": [{"name": "j", "type": "spherical", "child": "b", "kp": 1}]})");
    PoseD p0 = rest_pose(chain);
    PoseD p1 = p0;
    p1.rotations[0] = Eigen::Quaterniond(Eigen::AngleAxisd(M_PI / 2, Eigen::Vector3d::UnitZ()));
    const PoseD mid = interpolate_pose(p0, p1, 0.5);
    const Eigen::Quaterniond expected(Eigen::AngleAxisd(M_PI / 4, Eigen::Vector3d::UnitZ()));
    CHECK(quat_geodesic(mid.rotations[0], expected) < 1e-12);
    const MotionClip up = resample(make_clip("two", 1.0, {p0, p1}), 2.0);
    REQUIRE(up.size() >= 3);
    CHECK(quat_geodesic(up.frames[1].rotations[0], expected) < 1e-12);
  }

  SUBCASE("endpoints survive a down-up cycle") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> rate(7.0, 90.0);
    for (int trial = 0; trial < 50; ++trial) {
      const MotionClip round_trip = resample(resample(clip, rate(rng)), rate(rng));
      for (int j = 0; j < m.num_joints(); ++j) {
        CHECK(round_trip.frames.front().rotations[j].coeffs() == clip.frames.front().rotations[j].coeffs());
        CHECK(round_trip.frames.back().rotations[j].coeffs() == clip.frames.back().rotations[j].coeffs());
        CHECK(round_trip.frames.back().angles[j] == clip.frames.back().angles[j]);
      }
    }
  }
}

TEST_CASE("phase") {
  const SkeletonModel m = load_skeleton_file(oracle::data_path("toy_arm.model"));
  const MotionClip clip = load_clip(m, oracle::data_path("clips/toy_sine.clip"));
  CHECK(phase_of(clip, 0.0) == 0.0);
  CHECK(phase_of(clip, clip.duration() / 2) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(phase_of(clip, clip.duration()) == 0.0);
  CHECK(phase_of(clip, 3 * clip.duration()) == 0.0);
  for (int i = 0; i < clip.size(); ++i) CHECK(clip.phase[i] == doctest::Approx(double(i) / clip.size()));
  CHECK_THROWS_AS(phase_of(clip, -1.0), ContractError);
}

TEST_CASE("clip files round-trip") {
  const SkeletonModel m = load_skeleton_file(oracle::data_path("signer.model"));
  const MotionClip clip = load_clip(m, oracle::data_path("clips/69318.clip"));
  const MotionClip again = clip_from_json(m, clip_to_json(m, clip));
  CHECK(clip_to_json(m, again) == clip_to_json(m, clip));
  CHECK(again.rate == clip.rate);
}

}  // TEST_SUITE
