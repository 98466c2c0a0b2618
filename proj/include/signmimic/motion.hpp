#pragma once

#include <Eigen/Dense>
#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "signmimic/skeleton.hpp"

namespace signmimic {

inline constexpr int kBodySourceJoints = 24;
inline constexpr int kHandSourceJoints = 15;
inline constexpr int kHandKeypoints = 21;

/// Body joint names in the order the pose estimator exports them.
const std::array<std::string_view, kBodySourceJoints>& body_source_names();
/// Finger joint names (without the "lhand."/"rhand." prefix).
const std::array<std::string_view, kHandSourceJoints>& hand_source_names();

/// One frame of pose-estimator output. Rotations are local axis-angle vectors
/// expressed in the estimator frame (x left, y up, z forward). An empty hand
/// vector means that hand was not detected in the whole capture.
struct CaptureFrame {
  std::vector<Eigen::Vector3d> body;
  std::vector<Eigen::Vector3d> left_hand;
  std::vector<Eigen::Vector3d> right_hand;
  std::vector<Eigen::Vector3d> left_keypoints;
  std::vector<Eigen::Vector3d> right_keypoints;
  Eigen::Vector3d root_translation = Eigen::Vector3d::Zero();
};

struct SourceCapture {
  double fps = 30.0;
  std::vector<CaptureFrame> frames;
};

/// Reference motion at a fixed frame rate. Frame i has phase i / n, so the
/// loop period (duration) is n / rate.
struct MotionClip {
  std::string label;
  double rate = 30.0;
  std::vector<PoseD> frames;
  std::vector<double> phase;

  double duration() const { return static_cast<double>(frames.size()) / rate; }
  int size() const { return static_cast<int>(frames.size()); }
};

MotionClip make_clip(std::string label, double rate, std::vector<PoseD> frames);

/// Rotation taking estimator-frame vectors into the skeleton frame.
const Eigen::Quaterniond& source_to_model();

struct ConvertOptions {
  std::string label;
  double target_rate = 30.0;  // <= 0 keeps the capture rate
  bool smoothing = false;     // 5-frame moving average on axis-angles
  bool use_root_translation = false;
};

struct ConversionReport {
  MotionClip clip;
  std::vector<int> rejected_frames;
  bool mirrored_left = false;
  bool mirrored_right = false;
};

/// Retarget a capture onto the model. Sources mapped to the same joint are
/// composed parent-first; revolute joints take the twist about their axis.
/// Fixed joints (legs, root) are left at rest.
ConversionReport convert(const SourceCapture& capture, const SkeletonModel& model,
                         const ConvertOptions& options = {});

/// Uniform resampling with slerp for rotations and linear interpolation for
/// angles and root position. First and last frames are preserved exactly.
MotionClip resample(const MotionClip& clip, double target_rate);

PoseD interpolate_pose(const PoseD& a, const PoseD& b, double frac);

/// Normalized loop position of time t, in [0, 1).
double phase_of(const MotionClip& clip, double t);

SourceCapture mirror_capture(const SourceCapture& capture);
MotionClip mirror_clip(const SkeletonModel& model, const MotionClip& clip);

/// Capture ingestion: a single document {"fps", "frames": [...]} or a
/// directory holding one document per frame (sorted by file name) plus an
/// optional meta.json carrying "fps".
SourceCapture load_capture(const std::filesystem::path& path, double default_fps = 30.0);
SourceCapture parse_capture(std::string_view text);

std::string clip_to_json(const SkeletonModel& model, const MotionClip& clip);
MotionClip clip_from_json(const SkeletonModel& model, std::string_view text);
MotionClip load_clip(const SkeletonModel& model, const std::filesystem::path& path);
void save_clip(const SkeletonModel& model, const MotionClip& clip, const std::filesystem::path& path);

}  // namespace signmimic
