#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "signmimic/error.hpp"
#include "signmimic/rotation.hpp"

namespace signmimic {

enum class ShapeKind { capsule, box, sphere };
enum class JointType { spherical, revolute, fixed };

/// Collision-free proxy geometry used only to derive link inertia.
///   box:     dims = full extents (x, y, z)
///   sphere:  dims.x = radius
///   capsule: dims.x = radius, dims.y = length along `axis`
struct Shape {
  ShapeKind kind = ShapeKind::sphere;
  Eigen::Vector3d dims = Eigen::Vector3d::Constant(0.05);
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  int axis = 1;
};

struct Link {
  std::string name;
  int parent = -1;  // index into SkeletonModel::links, -1 for the root
  Eigen::Vector3d offset = Eigen::Vector3d::Zero();
  double mass = 1.0;
  Shape shape;
};

struct JointLimit {
  double low = -M_PI;
  double high = M_PI;
};

struct Joint {
  std::string name;
  JointType type = JointType::fixed;
  int child_link = -1;
  Eigen::Vector3d axis = Eigen::Vector3d::UnitX();  // revolute only
  std::vector<JointLimit> limits;                   // one per DoF
  double kp = 0.0;
  double kd = 0.0;
};

inline int dof_count(JointType type) {
  switch (type) {
    case JointType::spherical: return 3;
    case JointType::revolute: return 1;
    case JointType::fixed: return 0;
  }
  return 0;
}

struct RetargetEntry {
  std::string source;
  int joint = -1;
};

/// Named joint groups used for reward bookkeeping.
struct JointGroups {
  std::vector<std::string> body;
  std::vector<std::string> hand;
  std::vector<std::string> end_effectors;
};

/// Articulated character. Immutable after load_skeleton().
///
/// Links are stored parents-first. The joint whose child is the root link is
/// driven by Pose::root_rotation; it never owns coordinates. Joints listed in
/// `fixed` (and fixed-type joints) are held at rest. Every other joint owns a
/// contiguous block of the flat coordinate vector starting at dof_index[j].
struct SkeletonModel {
  std::string name;
  std::vector<Link> links;
  std::vector<Joint> joints;
  std::vector<int> link_joint;  // link -> joint whose child it is, or -1
  std::vector<bool> fixed;      // per joint
  std::vector<int> dof_index;   // per joint, -1 when not actuated
  std::vector<int> dof_joint;   // per flat DoF
  std::vector<RetargetEntry> retarget_map;
  JointGroups groups;
  int root_link = 0;
  int total_dofs = 0;

  // Per flat DoF.
  Eigen::VectorXd kp, kd, lower, upper, inertia;

  std::uint64_t fingerprint = 0;

  int link_index(std::string_view name) const;
  int joint_index(std::string_view name) const;
  bool actuated(int joint) const { return dof_index[joint] >= 0; }
  int num_links() const { return static_cast<int>(links.size()); }
  int num_joints() const { return static_cast<int>(joints.size()); }

 private:
  friend SkeletonModel finalize_model(SkeletonModel model);
  std::unordered_map<std::string, int> link_lookup_;
  std::unordered_map<std::string, int> joint_lookup_;
};

/// Character configuration. Joint values are indexed by joint: `rotations`
/// is read for spherical joints, `angles` for revolute joints.
template <typename Scalar>
struct Pose {
  Vec3<Scalar> root_position = Vec3<Scalar>::Zero();
  Quat<Scalar> root_rotation = Quat<Scalar>::Identity();
  std::vector<Quat<Scalar>> rotations;
  std::vector<Scalar> angles;
};
using PoseD = Pose<double>;

template <typename Scalar>
struct LinkFrame {
  Vec3<Scalar> position;
  Quat<Scalar> rotation;
};

/// Parse and validate a skeleton document (JSON text).
SkeletonModel load_skeleton(std::string_view model_text);
SkeletonModel load_skeleton_file(const std::filesystem::path& path);

/// Validates invariants, computes lookup tables, DoF layout, gains and the
/// diagonal composite-rigid-body inertia. Exposed for programmatic models.
SkeletonModel finalize_model(SkeletonModel model);

PoseD rest_pose(const SkeletonModel& model);

/// Checks dimensions and unit norms. Throws ContractError.
void validate_pose(const SkeletonModel& model, const PoseD& pose);

template <typename Scalar>
Quat<Scalar> joint_rotation(const SkeletonModel& model, const Pose<Scalar>& pose, int joint) {
  const Joint& jt = model.joints[joint];
  switch (jt.type) {
    case JointType::spherical:
      return pose.rotations[joint];
    case JointType::revolute: {
      using std::cos;
      using std::sin;
      const Scalar half = pose.angles[joint] / Scalar(2);
      const Vec3<Scalar> v = jt.axis.cast<Scalar>() * sin(half);
      return Quat<Scalar>(cos(half), v.x(), v.y(), v.z());
    }
    case JointType::fixed:
      break;
  }
  return Quat<Scalar>::Identity();
}

/// World frame of every link, indexed like model.links. The root link takes
/// (root_position, root_rotation); each child is placed at its parent's
/// frame composed with its offset and then rotated by its joint.
template <typename Scalar>
std::vector<LinkFrame<Scalar>> forward_kinematics(const SkeletonModel& model,
                                                  const Pose<Scalar>& pose) {
  if (pose.rotations.size() != model.joints.size() || pose.angles.size() != model.joints.size()) {
    throw ContractError("forward_kinematics: pose does not match model joint count");
  }
  std::vector<LinkFrame<Scalar>> frames(model.links.size());
  for (std::size_t i = 0; i < model.links.size(); ++i) {
    const Link& link = model.links[i];
    if (link.parent < 0) {
      frames[i] = {pose.root_position, pose.root_rotation};
      continue;
    }
    const LinkFrame<Scalar>& parent = frames[link.parent];
    LinkFrame<Scalar> frame;
    frame.position = parent.position + parent.rotation * link.offset.cast<Scalar>();
    const int j = model.link_joint[i];
    frame.rotation = j >= 0 ? parent.rotation * joint_rotation(model, pose, j) : parent.rotation;
    frames[i] = frame;
  }
  return frames;
}

/// Build a pose from actuated coordinates. Root and non-actuated joints are
/// taken from `base`. Spherical coordinates are rotation vectors.
template <typename Scalar>
Pose<Scalar> pose_from_coordinates(const SkeletonModel& model,
                                   const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& q,
                                   const PoseD& base) {
  if (q.size() != model.total_dofs) {
    throw ContractError("pose_from_coordinates: coordinate vector has wrong size");
  }
  Pose<Scalar> pose;
  pose.root_position = base.root_position.cast<Scalar>();
  pose.root_rotation = base.root_rotation.cast<Scalar>();
  pose.rotations.reserve(model.joints.size());
  pose.angles.reserve(model.joints.size());
  for (int j = 0; j < model.num_joints(); ++j) {
    pose.rotations.push_back(base.rotations[j].cast<Scalar>());
    pose.angles.push_back(Scalar(base.angles[j]));
    const int d = model.dof_index[j];
    if (d < 0) continue;
    if (model.joints[j].type == JointType::spherical) {
      pose.rotations[j] = quat_exp<Scalar>(q.template segment<3>(d));
    } else {
      pose.angles[j] = q(d);
    }
  }
  return pose;
}

Eigen::VectorXd coordinates_from_pose(const SkeletonModel& model, const PoseD& pose);

/// Left/right swap of a pose across the sagittal plane. Joint pairs are
/// matched by the "left_"/"right_" name prefix.
PoseD mirror_pose(const SkeletonModel& model, const PoseD& pose);
int mirrored_joint(const SkeletonModel& model, int joint);

std::string_view to_string(JointType type);

}  // namespace signmimic
