#include "signmimic/skeleton.hpp"

#include <algorithm>
#include <queue>
#include <set>

#include "signmimic/io.hpp"

namespace signmimic {

namespace {

std::string field_name(std::string_view array, std::size_t index, std::string_view field) {
  return std::string(array) + "[" + std::to_string(index) + "]." + std::string(field);
}

const Json& require(const Json& obj, std::string_view key, const std::string& where) {
  auto it = obj.find(std::string(key));
  if (it == obj.end()) throw ParseError(where + ": missing required field");
  return *it;
}

double require_number(const Json& obj, std::string_view key, const std::string& where) {
  const Json& v = require(obj, key, where);
  if (!v.is_number()) throw ParseError(where + ": expected number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ParseError(where + ": non-finite value");
  return x;
}

std::string require_string(const Json& obj, std::string_view key, const std::string& where) {
  const Json& v = require(obj, key, where);
  if (!v.is_string() || v.get<std::string>().empty()) {
    throw ParseError(where + ": expected non-empty string");
  }
  return v.get<std::string>();
}

ShapeKind parse_shape_kind(const std::string& s, const std::string& where) {
  if (s == "capsule") return ShapeKind::capsule;
  if (s == "box") return ShapeKind::box;
  if (s == "sphere") return ShapeKind::sphere;
  throw ParseError(where + ": unknown shape type '" + s + "'");
}

JointType parse_joint_type(const std::string& s, const std::string& where) {
  if (s == "spherical") return JointType::spherical;
  if (s == "revolute") return JointType::revolute;
  if (s == "fixed") return JointType::fixed;
  throw ParseError(where + ": unknown joint type '" + s + "'");
}

std::vector<std::string> string_list(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": expected array of strings");
  std::vector<std::string> out;
  for (const auto& e : j) {
    if (!e.is_string()) throw ParseError(where + ": expected array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

Eigen::Matrix3d shape_inertia(const Shape& s, double m) {
  Eigen::Vector3d d = Eigen::Vector3d::Zero();
  switch (s.kind) {
    case ShapeKind::box: {
      const Eigen::Vector3d e = s.dims.cwiseProduct(s.dims);
      d << e.y() + e.z(), e.x() + e.z(), e.x() + e.y();
      d *= m / 12.0;
      break;
    }
    case ShapeKind::sphere:
      d.setConstant(0.4 * m * s.dims.x() * s.dims.x());
      break;
    case ShapeKind::capsule: {
      const double r = s.dims.x();
      const double len = s.dims.y();
      d.setConstant(m * (3.0 * r * r + len * len) / 12.0);
      d(s.axis) = 0.5 * m * r * r;
      break;
    }
  }
  return d.asDiagonal();
}

}  // namespace

int SkeletonModel::link_index(std::string_view n) const {
  auto it = link_lookup_.find(std::string(n));
  return it == link_lookup_.end() ? -1 : it->second;
}

int SkeletonModel::joint_index(std::string_view n) const {
  auto it = joint_lookup_.find(std::string(n));
  return it == joint_lookup_.end() ? -1 : it->second;
}

std::string_view to_string(JointType type) {
  switch (type) {
    case JointType::spherical: return "spherical";
    case JointType::revolute: return "revolute";
    case JointType::fixed: return "fixed";
  }
  return "fixed";
}

SkeletonModel finalize_model(SkeletonModel model) {
  const int n_links = model.num_links();
  const int n_joints = model.num_joints();
  if (n_links == 0) throw StructuralError("skeleton: no links");

  std::set<std::string> names;
  for (int i = 0; i < n_links; ++i) {
    const Link& l = model.links[i];
    if (!names.insert(l.name).second) throw ParseError("links[" + std::to_string(i) + "].name: duplicate link '" + l.name + "'");
    if (!(l.mass > 0.0) || !std::isfinite(l.mass)) throw ParseError(field_name("links", i, "mass") + ": must be positive");
    if (!l.offset.allFinite()) throw ParseError(field_name("links", i, "offset") + ": non-finite");
    if (l.parent >= n_links || l.parent == i) throw StructuralError("links[" + std::to_string(i) + "]: invalid parent");
  }
  names.clear();
  for (int j = 0; j < n_joints; ++j) {
    if (!names.insert(model.joints[j].name).second) {
      throw ParseError("joints[" + std::to_string(j) + "].name: duplicate joint '" + model.joints[j].name + "'");
    }
  }

  // Topological order, parents first, stable with respect to input order.
  std::vector<int> roots;
  std::vector<std::vector<int>> children(n_links);
  for (int i = 0; i < n_links; ++i) {
    if (model.links[i].parent < 0) roots.push_back(i);
    else children[model.links[i].parent].push_back(i);
  }
  if (roots.size() != 1) {
    throw StructuralError("skeleton: expected exactly one root link, found " + std::to_string(roots.size()));
  }
  std::vector<int> order;
  std::vector<int> stack{roots[0]};
  while (!stack.empty()) {
    const int i = stack.back();
    stack.pop_back();
    order.push_back(i);
    for (auto it = children[i].rbegin(); it != children[i].rend(); ++it) stack.push_back(*it);
  }
  if (static_cast<int>(order.size()) != n_links) {
    throw StructuralError("skeleton: link parent graph contains a cycle");
  }
  std::vector<int> new_index(n_links);
  for (int k = 0; k < n_links; ++k) new_index[order[k]] = k;
  std::vector<Link> sorted;
  sorted.reserve(n_links);
  for (int k = 0; k < n_links; ++k) {
    Link l = model.links[order[k]];
    if (l.parent >= 0) l.parent = new_index[l.parent];
    sorted.push_back(std::move(l));
  }
  model.links = std::move(sorted);
  model.root_link = 0;

  model.link_lookup_.clear();
  model.joint_lookup_.clear();
  for (int i = 0; i < n_links; ++i) model.link_lookup_[model.links[i].name] = i;
  for (int j = 0; j < n_joints; ++j) model.joint_lookup_[model.joints[j].name] = j;

  model.link_joint.assign(n_links, -1);
  if (model.fixed.size() != static_cast<std::size_t>(n_joints)) model.fixed.resize(n_joints, false);
  for (int j = 0; j < n_joints; ++j) {
    Joint& jt = model.joints[j];
    const std::string where = "joints[" + std::to_string(j) + "]";
    if (jt.child_link < 0 || jt.child_link >= n_links) throw ParseError(where + ".child: unknown link");
    jt.child_link = new_index[jt.child_link];
    if (model.link_joint[jt.child_link] >= 0) {
      throw StructuralError(where + ".child: link '" + model.links[jt.child_link].name + "' already driven by a joint");
    }
    model.link_joint[jt.child_link] = j;
    const int ndof = dof_count(jt.type);
    if (jt.limits.empty()) jt.limits.assign(ndof, JointLimit{});
    if (static_cast<int>(jt.limits.size()) != ndof) throw ParseError(where + ".limits: expected one range per DoF");
    for (const auto& lim : jt.limits) {
      if (!(lim.low <= lim.high)) throw ParseError(where + ".limits: low exceeds high");
    }
    if (jt.type == JointType::revolute) {
      const double n = jt.axis.norm();
      if (!std::isfinite(n) || std::abs(n - 1.0) > 1e-6) throw ParseError(where + ".axis: must have unit norm");
      jt.axis /= n;
    }
  }

  // DoF layout over actuated joints.
  model.dof_index.assign(n_joints, -1);
  model.dof_joint.clear();
  int dofs = 0;
  for (int j = 0; j < n_joints; ++j) {
    const Joint& jt = model.joints[j];
    const bool actuated = jt.type != JointType::fixed && !model.fixed[j] && jt.child_link != model.root_link;
    if (!actuated) continue;
    if (!(jt.kp > 0.0)) throw ParseError("joints[" + std::to_string(j) + "].kp: actuated joint needs kp > 0");
    if (!(jt.kd >= 0.0)) throw ParseError("joints[" + std::to_string(j) + "].kd: must be >= 0");
    model.dof_index[j] = dofs;
    for (int k = 0; k < dof_count(jt.type); ++k) model.dof_joint.push_back(j);
    dofs += dof_count(jt.type);
  }
  model.total_dofs = dofs;

  for (auto& entry : model.retarget_map) {
    if (entry.joint < 0 || entry.joint >= n_joints) throw ParseError("retarget_map." + entry.source + ": unknown joint");
  }
  for (const auto& group : {model.groups.body, model.groups.hand, model.groups.end_effectors}) {
    for (const auto& name : group) {
      if (model.joint_index(name) < 0) throw ParseError("groups: unknown joint '" + name + "'");
    }
  }

  model.kp.resize(dofs);
  model.kd.resize(dofs);
  model.lower.resize(dofs);
  model.upper.resize(dofs);
  model.inertia.resize(dofs);

  // Rest configuration with the root at the origin: all link frames are
  // aligned with the model frame.
  std::vector<Eigen::Vector3d> pos(n_links);
  for (int i = 0; i < n_links; ++i) {
    const Link& l = model.links[i];
    pos[i] = l.parent < 0 ? Eigen::Vector3d::Zero() : Eigen::Vector3d(pos[l.parent] + l.offset);
  }
  auto in_subtree = [&](int link, int top) {
    for (int k = link; k >= 0; k = model.links[k].parent) {
      if (k == top) return true;
    }
    return false;
  };

  for (int j = 0; j < n_joints; ++j) {
    const int d0 = model.dof_index[j];
    if (d0 < 0) continue;
    const Joint& jt = model.joints[j];
    const Eigen::Vector3d pivot = pos[jt.child_link];
    for (int k = 0; k < dof_count(jt.type); ++k) {
      const Eigen::Vector3d axis = jt.type == JointType::revolute ? jt.axis : Eigen::Vector3d::Unit(k);
      double inertia = 0.0;
      for (int l = 0; l < n_links; ++l) {
        if (!in_subtree(l, jt.child_link)) continue;
        const Link& link = model.links[l];
        const Eigen::Vector3d r = pos[l] + link.shape.center - pivot;
        const Eigen::Vector3d perp = r - r.dot(axis) * axis;
        inertia += axis.dot(shape_inertia(link.shape, link.mass) * axis) + link.mass * perp.squaredNorm();
      }
      const int d = d0 + k;
      model.inertia(d) = std::max(inertia, 1e-8);
      model.kp(d) = jt.kp;
      model.kd(d) = jt.kd;
      model.lower(d) = jt.limits[k].low;
      model.upper(d) = jt.limits[k].high;
    }
  }
  return model;
}

SkeletonModel load_skeleton(std::string_view model_text) {
  Json doc;
  try {
    doc = Json::parse(model_text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("skeleton: malformed document: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("skeleton: document must be an object");
  const Json& version = require(doc, "schema_version", "schema_version");
  if (!version.is_number_integer() || version.get<int>() != 1) throw ParseError("schema_version: unsupported version");

  SkeletonModel model;
  model.name = doc.value("name", std::string("skeleton"));

  const Json& links = require(doc, "links", "links");
  if (!links.is_array()) throw ParseError("links: expected array");
  std::unordered_map<std::string, int> link_ids;
  for (std::size_t i = 0; i < links.size(); ++i) {
    const Json& lj = links[i];
    Link link;
    link.name = require_string(lj, "name", field_name("links", i, "name"));
    if (!link_ids.emplace(link.name, static_cast<int>(i)).second) {
      throw ParseError(field_name("links", i, "name") + ": duplicate link '" + link.name + "'");
    }
    link.mass = require_number(lj, "mass", field_name("links", i, "mass"));
    if (lj.contains("offset")) link.offset = vec3_from_json(lj["offset"], field_name("links", i, "offset"));
    if (lj.contains("shape")) {
      const Json& sj = lj["shape"];
      const std::string where = field_name("links", i, "shape");
      link.shape.kind = parse_shape_kind(require_string(sj, "type", where + ".type"), where + ".type");
      Eigen::VectorXd dims = vector_from_json(require(sj, "dims", where + ".dims"), where + ".dims");
      if (dims.size() < 1 || dims.size() > 3 || (dims.array() <= 0.0).any()) {
        throw ParseError(where + ".dims: expected 1-3 positive numbers");
      }
      link.shape.dims.setZero();
      link.shape.dims.head(dims.size()) = dims;
      if (sj.contains("center")) link.shape.center = vec3_from_json(sj["center"], where + ".center");
      const std::string axis = sj.value("axis", std::string("y"));
      if (axis != "x" && axis != "y" && axis != "z") throw ParseError(where + ".axis: expected x, y or z");
      link.shape.axis = axis[0] - 'x';
    }
    model.links.push_back(std::move(link));
  }
  for (std::size_t i = 0; i < links.size(); ++i) {
    const Json& p = require(links[i], "parent", field_name("links", i, "parent"));
    if (p.is_null()) continue;
    if (!p.is_string()) throw ParseError(field_name("links", i, "parent") + ": expected string or null");
    auto it = link_ids.find(p.get<std::string>());
    if (it == link_ids.end()) throw ParseError(field_name("links", i, "parent") + ": unknown link '" + p.get<std::string>() + "'");
    model.links[i].parent = it->second;
  }

  std::unordered_map<std::string, int> joint_ids;
  if (doc.contains("joints")) {
    const Json& joints = doc["joints"];
    if (!joints.is_array()) throw ParseError("joints: expected array");
    for (std::size_t j = 0; j < joints.size(); ++j) {
      const Json& jj = joints[j];
      Joint joint;
      joint.name = require_string(jj, "name", field_name("joints", j, "name"));
      if (!joint_ids.emplace(joint.name, static_cast<int>(j)).second) {
        throw ParseError(field_name("joints", j, "name") + ": duplicate joint '" + joint.name + "'");
      }
      joint.type = parse_joint_type(require_string(jj, "type", field_name("joints", j, "type")), field_name("joints", j, "type"));
      const std::string child = require_string(jj, "child", field_name("joints", j, "child"));
      auto it = link_ids.find(child);
      if (it == link_ids.end()) throw ParseError(field_name("joints", j, "child") + ": unknown link '" + child + "'");
      joint.child_link = it->second;
      if (joint.type == JointType::revolute) {
        joint.axis = vec3_from_json(require(jj, "axis", field_name("joints", j, "axis")), field_name("joints", j, "axis"));
      }
      if (jj.contains("limits")) {
        const Json& lims = jj["limits"];
        if (!lims.is_array()) throw ParseError(field_name("joints", j, "limits") + ": expected array of [low, high]");
        for (const auto& lim : lims) {
          Eigen::VectorXd r = vector_from_json(lim, field_name("joints", j, "limits"));
          if (r.size() != 2) throw ParseError(field_name("joints", j, "limits") + ": expected [low, high]");
          joint.limits.push_back({r(0), r(1)});
        }
      }
      joint.kp = jj.contains("kp") ? require_number(jj, "kp", field_name("joints", j, "kp")) : 0.0;
      joint.kd = jj.contains("kd") ? require_number(jj, "kd", field_name("joints", j, "kd")) : 0.0;
      model.joints.push_back(std::move(joint));
    }
  }

  model.fixed.assign(model.joints.size(), false);
  if (doc.contains("fixed")) {
    for (const auto& name : string_list(doc["fixed"], "fixed")) {
      auto it = joint_ids.find(name);
      if (it == joint_ids.end()) throw ParseError("fixed: unknown joint '" + name + "'");
      model.fixed[it->second] = true;
    }
  }
  if (doc.contains("retarget_map")) {
    const Json& rm = doc["retarget_map"];
    if (!rm.is_object()) throw ParseError("retarget_map: expected object");
    for (auto it = rm.begin(); it != rm.end(); ++it) {
      if (!it.value().is_string()) throw ParseError("retarget_map." + it.key() + ": expected joint name");
      auto jt = joint_ids.find(it.value().get<std::string>());
      if (jt == joint_ids.end()) {
        throw ParseError("retarget_map." + it.key() + ": unknown joint '" + it.value().get<std::string>() + "'");
      }
      model.retarget_map.push_back({it.key(), jt->second});
    }
  }
  if (doc.contains("groups")) {
    const Json& g = doc["groups"];
    if (g.contains("body")) model.groups.body = string_list(g["body"], "groups.body");
    if (g.contains("hand")) model.groups.hand = string_list(g["hand"], "groups.hand");
    if (g.contains("end_effectors")) model.groups.end_effectors = string_list(g["end_effectors"], "groups.end_effectors");
  }

  model = finalize_model(std::move(model));
  model.fingerprint = fnv1a(model_text);
  return model;
}

SkeletonModel load_skeleton_file(const std::filesystem::path& path) {
  return load_skeleton(read_text(path));
}

PoseD rest_pose(const SkeletonModel& model) {
  PoseD pose;
  pose.rotations.assign(model.joints.size(), Eigen::Quaterniond::Identity());
  pose.angles.assign(model.joints.size(), 0.0);
  return pose;
}

void validate_pose(const SkeletonModel& model, const PoseD& pose) {
  if (pose.rotations.size() != model.joints.size() || pose.angles.size() != model.joints.size()) {
    throw ContractError("pose: joint count does not match model");
  }
  require_unit(pose.root_rotation, "pose.root_rotation");
  for (const auto& q : pose.rotations) require_unit(q, "pose.rotations");
  if (!pose.root_position.allFinite()) throw ContractError("pose.root_position: non-finite");
}

Eigen::VectorXd coordinates_from_pose(const SkeletonModel& model, const PoseD& pose) {
  if (pose.rotations.size() != model.joints.size() || pose.angles.size() != model.joints.size()) {
    throw ContractError("coordinates_from_pose: pose does not match model");
  }
  Eigen::VectorXd q(model.total_dofs);
  for (int j = 0; j < model.num_joints(); ++j) {
    const int d = model.dof_index[j];
    if (d < 0) continue;
    if (model.joints[j].type == JointType::spherical) {
      q.segment<3>(d) = quat_log(pose.rotations[j]);
    } else {
      q(d) = pose.angles[j];
    }
  }
  return q;
}

int mirrored_joint(const SkeletonModel& model, int joint) {
  const std::string& name = model.joints[joint].name;
  std::string other;
  if (name.rfind("left_", 0) == 0) other = "right_" + name.substr(5);
  else if (name.rfind("right_", 0) == 0) other = "left_" + name.substr(6);
  else return joint;
  const int idx = model.joint_index(other);
  return idx >= 0 ? idx : joint;
}

PoseD mirror_pose(const SkeletonModel& model, const PoseD& pose) {
  PoseD out = pose;
  out.root_position = mirror_point(pose.root_position);
  out.root_rotation = mirror_rotation(pose.root_rotation);
  for (int j = 0; j < model.num_joints(); ++j) {
    const int m = mirrored_joint(model, j);
    out.rotations[m] = mirror_rotation(pose.rotations[j]);
    out.angles[m] = pose.angles[j];
  }
  return out;
}

}  // namespace signmimic
