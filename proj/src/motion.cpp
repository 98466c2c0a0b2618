#include "signmimic/motion.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "signmimic/io.hpp"

namespace signmimic {

namespace {

constexpr int kLeftHandBase = kBodySourceJoints;
constexpr int kRightHandBase = kBodySourceJoints + kHandSourceJoints;

int source_index(std::string_view name) {
  const auto& body = body_source_names();
  for (int i = 0; i < kBodySourceJoints; ++i) {
    if (body[i] == name) return i;
  }
  const auto& hand = hand_source_names();
  for (int base : {kLeftHandBase, kRightHandBase}) {
    const std::string_view prefix = base == kLeftHandBase ? "lhand." : "rhand.";
    if (name.substr(0, prefix.size()) != prefix) continue;
    for (int k = 0; k < kHandSourceJoints; ++k) {
      if (hand[k] == name.substr(prefix.size())) return base + k;
    }
  }
  return -1;
}

std::string source_name(int index) {
  if (index < kLeftHandBase) return std::string(body_source_names()[index]);
  if (index < kRightHandBase) return "lhand." + std::string(hand_source_names()[index - kLeftHandBase]);
  return "rhand." + std::string(hand_source_names()[index - kRightHandBase]);
}

// Estimator frame: x points to the subject's left, so the sagittal plane is x = 0.
Eigen::Vector3d mirror_source_rotvec(const Eigen::Vector3d& r) { return {r.x(), -r.y(), -r.z()}; }
Eigen::Vector3d mirror_source_point(const Eigen::Vector3d& p) { return {-p.x(), p.y(), p.z()}; }

std::vector<Eigen::Vector3d> mirror_hand(const std::vector<Eigen::Vector3d>& hand) {
  std::vector<Eigen::Vector3d> out;
  out.reserve(hand.size());
  for (const auto& r : hand) out.push_back(mirror_source_rotvec(r));
  return out;
}

std::vector<Eigen::Vector3d> mirror_points(const std::vector<Eigen::Vector3d>& pts) {
  std::vector<Eigen::Vector3d> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back(mirror_source_point(p));
  return out;
}

bool finite_frame(const CaptureFrame& f) {
  auto ok = [](const std::vector<Eigen::Vector3d>& v) {
    return std::all_of(v.begin(), v.end(), [](const Eigen::Vector3d& x) { return x.allFinite(); });
  };
  return ok(f.body) && ok(f.left_hand) && ok(f.right_hand) && f.root_translation.allFinite();
}

const Eigen::Vector3d& source_rotvec(const CaptureFrame& f, int index) {
  if (index < kLeftHandBase) return f.body[index];
  if (index < kRightHandBase) return f.left_hand[index - kLeftHandBase];
  return f.right_hand[index - kRightHandBase];
}

void smooth_in_place(std::vector<CaptureFrame>& frames) {
  const int n = static_cast<int>(frames.size());
  const std::vector<CaptureFrame> src = frames;
  auto average = [&](auto member, int i, std::size_t k) {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    int count = 0;
    for (int t = std::max(0, i - 2); t <= std::min(n - 1, i + 2); ++t) {
      sum += (src[t].*member)[k];
      ++count;
    }
    return Eigen::Vector3d(sum / count);
  };
  for (int i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < frames[i].body.size(); ++k) frames[i].body[k] = average(&CaptureFrame::body, i, k);
    for (std::size_t k = 0; k < frames[i].left_hand.size(); ++k) frames[i].left_hand[k] = average(&CaptureFrame::left_hand, i, k);
    for (std::size_t k = 0; k < frames[i].right_hand.size(); ++k) frames[i].right_hand[k] = average(&CaptureFrame::right_hand, i, k);
  }
}

std::vector<Eigen::Vector3d> read_triples(const Json& j, std::size_t expected, const std::string& where) {
  std::vector<Eigen::Vector3d> out;
  if (j.is_null()) return out;
  if (!j.is_array()) throw ParseError(where + ": expected array");
  if (!j.empty() && j[0].is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (j[i].size() != 3) throw ParseError(where + ": expected triples");
      out.emplace_back(j[i][0].get<double>(), j[i][1].get<double>(), j[i][2].get<double>());
    }
  } else {
    if (j.size() % 3 != 0) throw ParseError(where + ": length not a multiple of 3");
    for (std::size_t i = 0; i < j.size(); i += 3) {
      auto value = [&](std::size_t k) {
        return j[k].is_number() ? j[k].get<double>() : std::numeric_limits<double>::quiet_NaN();
      };
      out.emplace_back(value(i), value(i + 1), value(i + 2));
    }
  }
  if (expected && out.size() != expected) {
    throw ParseError(where + ": expected " + std::to_string(expected) + " joints, got " + std::to_string(out.size()));
  }
  return out;
}

CaptureFrame parse_frame(const Json& f, const std::string& where) {
  if (!f.is_object()) throw ParseError(where + ": expected object");
  CaptureFrame frame;
  if (!f.contains("pred_body_pose")) throw ParseError(where + ".pred_body_pose: missing required field");
  frame.body = read_triples(f["pred_body_pose"], kBodySourceJoints, where + ".pred_body_pose");
  if (f.contains("pred_lhand_pose")) frame.left_hand = read_triples(f["pred_lhand_pose"], kHandSourceJoints, where + ".pred_lhand_pose");
  if (f.contains("pred_rhand_pose")) frame.right_hand = read_triples(f["pred_rhand_pose"], kHandSourceJoints, where + ".pred_rhand_pose");
  if (f.contains("pred_lhand_joints")) frame.left_keypoints = read_triples(f["pred_lhand_joints"], kHandKeypoints, where + ".pred_lhand_joints");
  if (f.contains("pred_rhand_joints")) frame.right_keypoints = read_triples(f["pred_rhand_joints"], kHandKeypoints, where + ".pred_rhand_joints");
  if (f.contains("root_translation")) {
    auto t = read_triples(f["root_translation"], 1, where + ".root_translation");
    frame.root_translation = t[0];
  }
  return frame;
}

Json quat_json(const Eigen::Quaterniond& q) { return Json::array({q.w(), q.x(), q.y(), q.z()}); }

Eigen::Quaterniond quat_from_json(const Json& j, const std::string& where) {
  Eigen::VectorXd v = vector_from_json(j, where);
  if (v.size() != 4) throw ParseError(where + ": expected [w, x, y, z]");
  Eigen::Quaterniond q(v(0), v(1), v(2), v(3));
  const double dev = std::abs(q.norm() - 1.0);
  if (dev > 1e-6) throw ParseError(where + ": quaternion not unit-norm");
  return dev > 1e-12 ? q.normalized() : q;
}

}  // namespace

const std::array<std::string_view, kBodySourceJoints>& body_source_names() {
  static const std::array<std::string_view, kBodySourceJoints> names = {
      "pelvis",     "L_hip",      "R_hip",    "spine1",     "L_knee",     "R_knee",
      "spine2",     "L_ankle",    "R_ankle",  "spine3",     "L_foot",     "R_foot",
      "neck",       "L_collar",   "R_collar", "head",       "L_shoulder", "R_shoulder",
      "L_elbow",    "R_elbow",    "L_wrist",  "R_wrist",    "L_hand",     "R_hand"};
  return names;
}

const std::array<std::string_view, kHandSourceJoints>& hand_source_names() {
  static const std::array<std::string_view, kHandSourceJoints> names = {
      "index1", "index2", "index3", "middle1", "middle2", "middle3", "pinky1", "pinky2",
      "pinky3", "ring1",  "ring2",  "ring3",   "thumb1",  "thumb2",  "thumb3"};
  return names;
}

const Eigen::Quaterniond& source_to_model() {
  // model x (forward) = source z, model y (up) = source y, model z (right) = -source x
  static const Eigen::Quaterniond q = [] {
    Eigen::Matrix3d c;
    c << 0, 0, 1, 0, 1, 0, -1, 0, 0;
    return Eigen::Quaterniond(c);
  }();
  return q;
}

MotionClip make_clip(std::string label, double rate, std::vector<PoseD> frames) {
  MotionClip clip;
  clip.label = std::move(label);
  clip.rate = rate;
  clip.frames = std::move(frames);
  const double n = static_cast<double>(clip.frames.size());
  clip.phase.resize(clip.frames.size());
  for (std::size_t i = 0; i < clip.frames.size(); ++i) clip.phase[i] = static_cast<double>(i) / n;
  return clip;
}

ConversionReport convert(const SourceCapture& capture, const SkeletonModel& model, const ConvertOptions& options) {
  if (!(capture.fps > 0.0)) throw IngestionError("convert: capture fps must be positive");
  if (capture.frames.empty()) throw IngestionError("convert: capture has no frames");

  const CaptureFrame& first = capture.frames.front();
  for (std::size_t i = 0; i < capture.frames.size(); ++i) {
    const CaptureFrame& f = capture.frames[i];
    if (f.body.size() != static_cast<std::size_t>(kBodySourceJoints) ||
        f.left_hand.size() != first.left_hand.size() || f.right_hand.size() != first.right_hand.size()) {
      throw IngestionError("convert: frame " + std::to_string(i) + " payload arity differs from frame 0");
    }
  }

  ConversionReport report;
  std::vector<CaptureFrame> frames;
  frames.reserve(capture.frames.size());
  for (std::size_t i = 0; i < capture.frames.size(); ++i) {
    if (!finite_frame(capture.frames[i])) {
      report.rejected_frames.push_back(static_cast<int>(i));
      continue;
    }
    frames.push_back(capture.frames[i]);
  }

  const bool has_left = !first.left_hand.empty();
  const bool has_right = !first.right_hand.empty();
  if (has_left != has_right) {
    for (auto& f : frames) {
      if (has_right) f.left_hand = mirror_hand(f.right_hand);
      else f.right_hand = mirror_hand(f.left_hand);
    }
    report.mirrored_left = has_right;
    report.mirrored_right = has_left;
  }

  // Group sources by target joint, parent-first (estimator order).
  std::map<int, std::vector<int>> sources_for_joint;
  std::vector<std::string> unknown;
  for (const auto& entry : model.retarget_map) {
    if (!model.actuated(entry.joint)) continue;
    const int idx = source_index(entry.source);
    if (idx < 0) {
      unknown.push_back(entry.source);
      continue;
    }
    sources_for_joint[entry.joint].push_back(idx);
  }
  std::vector<std::string> absent = unknown;
  for (auto& [joint, list] : sources_for_joint) {
    std::sort(list.begin(), list.end());
    for (int idx : list) {
      // One detected hand is enough: the other is mirrored from it.
      if (idx >= kLeftHandBase && !has_left && !has_right) absent.push_back(source_name(idx));
    }
  }
  if (!absent.empty()) {
    std::string msg = "convert: mapped source joints absent from capture:";
    for (const auto& a : absent) msg += " " + a;
    throw IngestionError(msg);
  }
  if (frames.size() < 2) {
    throw IngestionError("convert: fewer than 2 usable frames (" + std::to_string(report.rejected_frames.size()) +
                         " rejected)");
  }
  if (options.smoothing) smooth_in_place(frames);

  const Eigen::Quaterniond& c = source_to_model();
  const Eigen::Quaterniond c_inv = c.conjugate();
  std::vector<PoseD> poses;
  poses.reserve(frames.size());
  for (const auto& f : frames) {
    PoseD pose = rest_pose(model);
    if (options.use_root_translation) pose.root_position = c * f.root_translation;
    for (const auto& [joint, list] : sources_for_joint) {
      Eigen::Quaterniond local = Eigen::Quaterniond::Identity();
      for (int idx : list) local = local * quat_exp<double>(source_rotvec(f, idx));
      const Eigen::Quaterniond q = canonical<double>((c * local * c_inv).normalized());
      const Joint& jt = model.joints[joint];
      if (jt.type == JointType::spherical) {
        pose.rotations[joint] = q;
      } else if (jt.type == JointType::revolute) {
        pose.angles[joint] = std::clamp(twist_angle<double>(q, jt.axis), jt.limits[0].low, jt.limits[0].high);
      }
    }
    poses.push_back(std::move(pose));
  }

  report.clip = make_clip(options.label, capture.fps, std::move(poses));
  if (options.target_rate > 0.0 && options.target_rate != capture.fps) {
    report.clip = resample(report.clip, options.target_rate);
  }
  return report;
}

PoseD interpolate_pose(const PoseD& a, const PoseD& b, double frac) {
  if (frac <= 0.0) return a;
  if (frac >= 1.0) return b;
  PoseD out = a;
  out.root_position = (1.0 - frac) * a.root_position + frac * b.root_position;
  out.root_rotation = a.root_rotation.slerp(frac, b.root_rotation);
  for (std::size_t j = 0; j < a.rotations.size(); ++j) {
    out.rotations[j] = a.rotations[j].slerp(frac, b.rotations[j]);
    out.angles[j] = (1.0 - frac) * a.angles[j] + frac * b.angles[j];
  }
  return out;
}

MotionClip resample(const MotionClip& clip, double target_rate) {
  if (!(target_rate > 0.0)) throw ContractError("resample: target rate must be positive");
  const int n = clip.size();
  if (n < 2) throw ContractError("resample: clip needs at least 2 frames");
  const int m = std::max(2, static_cast<int>(std::lround(n * target_rate / clip.rate)));
  const double last_time = (n - 1) / clip.rate;

  std::vector<PoseD> frames;
  frames.reserve(m);
  for (int j = 0; j < m; ++j) {
    const double t = j + 1 == m ? last_time : std::min(j / target_rate, last_time);
    double pos = t * clip.rate;
    if (std::abs(pos - std::round(pos)) < 1e-9) pos = std::round(pos);
    const int i0 = std::min(static_cast<int>(std::floor(pos)), n - 1);
    if (j + 1 == m || i0 >= n - 1) {
      frames.push_back(j + 1 == m ? clip.frames.back() : clip.frames[i0]);
      continue;
    }
    frames.push_back(interpolate_pose(clip.frames[i0], clip.frames[i0 + 1], pos - i0));
  }
  return make_clip(clip.label, target_rate, std::move(frames));
}

double phase_of(const MotionClip& clip, double t) {
  if (!(t >= 0.0)) throw ContractError("phase_of: t must be non-negative");
  const double d = clip.duration();
  double p = std::fmod(t, d) / d;
  if (p >= 1.0) p = 0.0;
  // fmod is exact; t = k * d can still leave a rounding residue of one ulp.
  if (1.0 - p < 1e-12) p = 0.0;
  return p;
}

SourceCapture mirror_capture(const SourceCapture& capture) {
  SourceCapture out = capture;
  const auto& names = body_source_names();
  std::vector<int> partner(kBodySourceJoints);
  for (int i = 0; i < kBodySourceJoints; ++i) {
    partner[i] = i;
    std::string name(names[i]);
    std::string other;
    if (name.rfind("L_", 0) == 0) other = "R_" + name.substr(2);
    else if (name.rfind("R_", 0) == 0) other = "L_" + name.substr(2);
    if (!other.empty()) partner[i] = source_index(other);
  }
  for (std::size_t f = 0; f < capture.frames.size(); ++f) {
    const CaptureFrame& src = capture.frames[f];
    CaptureFrame& dst = out.frames[f];
    for (int i = 0; i < kBodySourceJoints; ++i) dst.body[partner[i]] = mirror_source_rotvec(src.body[i]);
    dst.left_hand = mirror_hand(src.right_hand);
    dst.right_hand = mirror_hand(src.left_hand);
    dst.left_keypoints = mirror_points(src.right_keypoints);
    dst.right_keypoints = mirror_points(src.left_keypoints);
    dst.root_translation = mirror_source_point(src.root_translation);
  }
  return out;
}

MotionClip mirror_clip(const SkeletonModel& model, const MotionClip& clip) {
  MotionClip out = clip;
  for (auto& frame : out.frames) frame = mirror_pose(model, frame);
  return out;
}

SourceCapture parse_capture(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("capture: malformed document: ") + e.what());
  }
  SourceCapture capture;
  capture.fps = doc.value("fps", 30.0);
  if (!doc.contains("frames") || !doc["frames"].is_array()) throw ParseError("capture.frames: expected array");
  for (std::size_t i = 0; i < doc["frames"].size(); ++i) {
    capture.frames.push_back(parse_frame(doc["frames"][i], "frames[" + std::to_string(i) + "]"));
  }
  return capture;
}

SourceCapture load_capture(const std::filesystem::path& path, double default_fps) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(path)) return parse_capture(read_text(path));
  SourceCapture capture;
  capture.fps = default_fps;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(path)) {
    if (entry.path().extension() != ".json") continue;
    if (entry.path().filename() == "meta.json") {
      capture.fps = Json::parse(read_text(entry.path())).value("fps", default_fps);
      continue;
    }
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    Json doc;
    try {
      doc = Json::parse(read_text(file));
    } catch (const Json::parse_error& e) {
      throw ParseError(file.filename().string() + ": malformed document");
    }
    capture.frames.push_back(parse_frame(doc, file.filename().string()));
  }
  return capture;
}

std::string clip_to_json(const SkeletonModel& model, const MotionClip& clip) {
  Json doc;
  doc["format"] = "signmimic-clip";
  doc["schema_version"] = 1;
  doc["label"] = clip.label;
  doc["rate"] = clip.rate;
  Json frames = Json::array();
  for (const auto& pose : clip.frames) {
    Json f;
    f["root_position"] = Json::array({pose.root_position.x(), pose.root_position.y(), pose.root_position.z()});
    f["root_rotation"] = quat_json(pose.root_rotation);
    Json joints = Json::object();
    for (int j = 0; j < model.num_joints(); ++j) {
      const Joint& jt = model.joints[j];
      if (jt.type == JointType::spherical) joints[jt.name] = quat_json(pose.rotations[j]);
      else if (jt.type == JointType::revolute) joints[jt.name] = pose.angles[j];
    }
    f["joints"] = std::move(joints);
    frames.push_back(std::move(f));
  }
  doc["frames"] = std::move(frames);
  return doc.dump(1) + "\n";
}

MotionClip clip_from_json(const SkeletonModel& model, std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("clip: malformed document: ") + e.what());
  }
  if (doc.value("schema_version", 0) != 1) throw ParseError("clip.schema_version: unsupported version");
  if (!doc.contains("rate") || !doc["rate"].is_number() || !(doc["rate"].get<double>() > 0.0)) {
    throw ParseError("clip.rate: expected positive number");
  }
  if (!doc.contains("frames") || !doc["frames"].is_array()) throw ParseError("clip.frames: expected array");
  std::vector<PoseD> frames;
  for (std::size_t i = 0; i < doc["frames"].size(); ++i) {
    const Json& f = doc["frames"][i];
    const std::string where = "clip.frames[" + std::to_string(i) + "]";
    PoseD pose = rest_pose(model);
    if (f.contains("root_position")) pose.root_position = vec3_from_json(f["root_position"], where + ".root_position");
    if (f.contains("root_rotation")) pose.root_rotation = quat_from_json(f["root_rotation"], where + ".root_rotation");
    if (f.contains("joints")) {
      for (auto it = f["joints"].begin(); it != f["joints"].end(); ++it) {
        const int j = model.joint_index(it.key());
        if (j < 0) throw ParseError(where + ".joints." + it.key() + ": unknown joint");
        const JointType type = model.joints[j].type;
        if (type == JointType::spherical) {
          pose.rotations[j] = quat_from_json(it.value(), where + ".joints." + it.key());
        } else if (type == JointType::revolute) {
          if (!it.value().is_number()) throw ParseError(where + ".joints." + it.key() + ": expected angle");
          pose.angles[j] = it.value().get<double>();
        }
      }
    }
    frames.push_back(std::move(pose));
  }
  if (frames.size() < 2) throw ParseError("clip.frames: need at least 2 frames");
  return make_clip(doc.value("label", std::string()), doc["rate"].get<double>(), std::move(frames));
}

MotionClip load_clip(const SkeletonModel& model, const std::filesystem::path& path) {
  return clip_from_json(model, read_text(path));
}

void save_clip(const SkeletonModel& model, const MotionClip& clip, const std::filesystem::path& path) {
  write_text(path, clip_to_json(model, clip));
}

}  // namespace signmimic
