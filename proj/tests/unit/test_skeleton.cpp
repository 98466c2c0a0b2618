#include <doctest.h>

#include <random>

#include "signmimic/skeleton.hpp"
#include "support/oracles.hpp"

using namespace signmimic;

namespace {

const char* kChain = R"({
  "schema_version": 1,
  "links": [
    {"name": "a", "parent": null, "mass": 1},
    {"name": "b", "parent": "a", "offset": [0.1, 0.2, 0.3], "mass": 1},
    {"name": "c", "parent": "b", "offset": [0.4, -0.1, 0.2], "mass": 1},
    {"name": "d", "parent": "c", "offset": [-0.2, 0.3, 0.1], "mass": 1}
  ],
  "joints": [
    {"name": "ab", "type": "spherical", "child": "b", "kp": 10, "kd": 1},
    {"name": "bc", "type": "revolute", "axis": [0, 0.6, 0.8], "child": "c", "kp": 10, "kd": 1},
    {"name": "cd", "type": "spherical", "child": "d", "kp": 10, "kd": 1}
  ]
})";

Eigen::Matrix4d homogeneous(const Eigen::Matrix3d& r, const Eigen::Vector3d& t) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = r;
  m.topRightCorner<3, 1>() = t;
  return m;
}

Eigen::Vector3d random_rotvec(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng)};
}

}  // namespace

TEST_SUITE("skeleton") {

TEST_CASE("minimal document has no degrees of freedom") {
  const SkeletonModel m = load_skeleton(R"({"schema_version": 1, "links": [{"name": "root", "parent": null, "mass": 1}]})");
  CHECK(m.num_links() == 1);
  CHECK(m.num_joints() == 0);
  CHECK(m.total_dofs == 0);
}

TEST_CASE("bundled signer model") {
  const SkeletonModel m = load_skeleton_file(oracle::data_path("signer.model"));
  CHECK(m.num_joints() == 45);
  CHECK(m.num_links() == 45);
  CHECK(m.total_dofs == 44);
  CHECK(m.groups.end_effectors == std::vector<std::string>{"left_wrist", "right_wrist"});
  int hand_joints = 0;
  for (const auto& j : m.joints) {
    if (j.name.find("_index_") != std::string::npos || j.name.find("_middle_") != std::string::npos ||
        j.name.find("_ring_") != std::string::npos || j.name.find("_pinky_") != std::string::npos ||
        j.name.find("_thumb_") != std::string::npos || j.name.find("_wrist") != std::string::npos) {
      ++hand_joints;
    }
  }
  CHECK(hand_joints == 32);
  CHECK((m.inertia.array() > 0.0).all());
}

TEST_CASE("malformed documents are rejected") {
  CHECK_THROWS_AS(load_skeleton("{"), ParseError);
  CHECK_THROWS_AS(load_skeleton(R"({"links": []})"), ParseError);
  CHECK_THROWS_AS(load_skeleton(R"({
    "schema_version": 1,
    "links": [{"name": "a", "parent": null, "mass": 1}, {"name": "b", "parent": "a", "mass": 1},
              {"name": "c", "parent": "a", "mass": 1}],
    "joints": [{"name": "j", "type": "revolute", "axis": [1, 0, 0], "child": "b", "kp": 1},
               {"name": "j", "type": "revolute", "axis": [1, 0, 0], "child": "c", "kp": 1}]
  })"),
                  ParseError);
  CHECK_THROWS_AS(load_skeleton(R"({"schema_version": 1, "links": [{"name": "a", "parent": "nope", "mass": 1}]})"),
                  ParseError);
  CHECK_THROWS_AS(load_skeleton(R"({
    "schema_version": 1,
    "links": [{"name": "a", "parent": null, "mass": 1}, {"name": "b", "parent": "a", "mass": 1}],
    "joints": [{"name": "j", "type": "revolute", "axis": [1, 1, 0], "child": "b", "kp": 1}]
  })"),
                  ParseError);
}

TEST_CASE("identity pose places links at cumulative offsets") {
  const SkeletonModel m = load_skeleton_file(oracle::data_path("signer.model"));
  const auto frames = forward_kinematics(m, rest_pose(m));
  for (int i = 0; i < m.num_links(); ++i) {
    Eigen::Vector3d expected = Eigen::Vector3d::Zero();
    for (int l = i; l >= 0; l = m.links[l].parent) expected += m.links[l].offset;
    CHECK((frames[i].position - expected).norm() < 1e-12);
  }
}

TEST_CASE("quarter turn about z moves the child onto y") {
  const SkeletonModel m = load_skeleton(R"({
    "schema_version": 1,
    "links": [{"name": "base", "parent": null, "mass": 1},
              {"name": "arm", "parent": "base", "mass": 1},
              {"name": "tip", "parent": "arm", "offset": [1, 0, 0], "mass": 1}],
    "joints": [{"name": "hinge", "type": "revolute", "axis": [0, 0, 1], "child": "arm", "kp": 1}]
  })");
  PoseD p = rest_pose(m);
  p.angles[0] = M_PI / 2;
  const auto frames = forward_kinematics(m, p);
  CHECK((frames[2].position - Eigen::Vector3d(0, 1, 0)).norm() < 1e-12);
}

TEST_CASE("random chain poses match a homogeneous-matrix oracle") {
  const SkeletonModel m = load_skeleton(kChain);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    PoseD p = rest_pose(m);
    p.root_position = random_rotvec(rng, 1.0);
    const Eigen::Vector3d root_rv = random_rotvec(rng, 2.0);
    const Eigen::Vector3d ab = random_rotvec(rng, 2.0);
    const Eigen::Vector3d cd = random_rotvec(rng, 2.0);
    p.root_rotation = Eigen::Quaterniond(Eigen::AngleAxisd(root_rv.norm(), root_rv.normalized()));
    p.rotations[0] = Eigen::Quaterniond(Eigen::AngleAxisd(ab.norm(), ab.normalized()));
    p.angles[1] = u(rng);
    p.rotations[2] = Eigen::Quaterniond(Eigen::AngleAxisd(cd.norm(), cd.normalized()));

    auto rot = [](const Eigen::Vector3d& rv) { return Eigen::AngleAxisd(rv.norm(), rv.normalized()).toRotationMatrix(); };
    const Eigen::Matrix3d hinge = Eigen::AngleAxisd(p.angles[1], Eigen::Vector3d(0, 0.6, 0.8)).toRotationMatrix();
    std::vector<Eigen::Matrix4d> world(4);
    world[0] = homogeneous(rot(root_rv), p.root_position);
    world[1] = world[0] * homogeneous(rot(ab), m.links[1].offset);
    world[2] = world[1] * homogeneous(hinge, m.links[2].offset);
    world[3] = world[2] * homogeneous(rot(cd), m.links[3].offset);

    const auto frames = forward_kinematics(m, p);
    for (int i = 0; i < 4; ++i) {
      CHECK((frames[i].position - world[i].topRightCorner<3, 1>()).norm() < 1e-12);
      CHECK((frames[i].rotation.toRotationMatrix() - world[i].topLeftCorner<3, 3>()).norm() < 1e-12);
    }
  }
}

TEST_CASE("geodesic distance") {
  const Eigen::Quaterniond id = Eigen::Quaterniond::Identity();
  const Eigen::Quaterniond x90(Eigen::AngleAxisd(M_PI / 2, Eigen::Vector3d::UnitX()));
  CHECK(quat_geodesic(id, id) == 0.0);
  CHECK(quat_geodesic(id, x90) == doctest::Approx(M_PI / 2).epsilon(1e-14));
  Eigen::Quaterniond neg = x90;
  neg.coeffs() = -neg.coeffs();
  CHECK(quat_geodesic(x90, neg) == 0.0);
  CHECK_THROWS_AS(quat_geodesic(id, Eigen::Quaterniond(2, 0, 0, 0)), ContractError);
}

TEST_CASE("exponential and logarithm maps are inverse") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Vector3d rv = random_rotvec(rng, i % 2 ? 1.7 : 1e-7);
    CHECK((quat_log(quat_exp(rv)) - rv).norm() < 1e-12);
    CHECK(std::abs(quat_exp(rv).norm() - 1.0) < 1e-14);
  }
}

TEST_CASE("mirroring is an involution that swaps sides") {
  const SkeletonModel m = load_skeleton_file(oracle::data_path("signer.model"));
  std::mt19937_64 rng(11);
  PoseD p = rest_pose(m);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int j = 0; j < m.num_joints(); ++j) {
    p.rotations[j] = quat_exp<double>(random_rotvec(rng, 1.0));
    p.angles[j] = u(rng);
  }
  const PoseD once = mirror_pose(m, p);
  const PoseD twice = mirror_pose(m, once);
  for (int j = 0; j < m.num_joints(); ++j) {
    CHECK(quat_geodesic(twice.rotations[j], p.rotations[j]) < 1e-12);
    CHECK(twice.angles[j] == doctest::Approx(p.angles[j]).epsilon(1e-14));
  }
  const int r = m.joint_index("right_elbow");
  const int l = m.joint_index("left_elbow");
  CHECK(mirrored_joint(m, r) == l);
  // Mirrored world geometry: the left forearm of the mirror sits where the
  // reflected right forearm was.
  const auto a = forward_kinematics(m, p);
  const auto b = forward_kinematics(m, once);
  const int rl = m.joints[r].child_link;
  const int ll = m.joints[l].child_link;
  CHECK((b[ll].position - mirror_point<double>(a[rl].position)).norm() < 1e-12);
}

TEST_CASE("coordinates round-trip through poses") {
  const SkeletonModel m = load_skeleton_file(oracle::data_path("signer.model"));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd q(m.total_dofs);
  for (Eigen::Index i = 0; i < q.size(); ++i) q(i) = u(rng);
  const PoseD p = pose_from_coordinates<double>(m, q, rest_pose(m));
  CHECK((coordinates_from_pose(m, p) - q).norm() < 1e-12);
}

}  // TEST_SUITE
