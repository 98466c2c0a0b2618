#pragma once

#include <Eigen/Geometry>
#include <cmath>

#include "signmimic/error.hpp"

namespace signmimic {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Quat = Eigen::Quaternion<Scalar>;

/// Exponential map: rotation vector (axis * angle) to unit quaternion.
/// Uses a Taylor expansion near zero so that the result stays smooth for
/// automatic differentiation.
template <typename Scalar>
Quat<Scalar> quat_exp(const Vec3<Scalar>& rotvec) {
  using std::cos;
  using std::sin;
  using std::sqrt;
  const Scalar theta_sq = rotvec.squaredNorm();
  if (theta_sq < Scalar(1e-12)) {
    const Scalar w = Scalar(1) - theta_sq / Scalar(8);
    const Vec3<Scalar> v = rotvec * (Scalar(0.5) - theta_sq / Scalar(48));
    return Quat<Scalar>(w, v.x(), v.y(), v.z());
  }
  const Scalar theta = sqrt(theta_sq);
  const Scalar half = theta / Scalar(2);
  const Vec3<Scalar> v = rotvec * (sin(half) / theta);
  return Quat<Scalar>(cos(half), v.x(), v.y(), v.z());
}

/// Logarithm map: unit quaternion to rotation vector with angle in [0, pi].
template <typename Scalar>
Vec3<Scalar> quat_log(Quat<Scalar> q) {
  using std::atan2;
  if (q.w() < Scalar(0)) q.coeffs() = -q.coeffs();
  const Scalar vec_norm = q.vec().norm();
  if (vec_norm < Scalar(1e-12)) return q.vec() * (Scalar(2) / q.w());
  const Scalar angle = Scalar(2) * atan2(vec_norm, q.w());
  return q.vec() * (angle / vec_norm);
}

inline void require_unit(const Eigen::Quaterniond& q, const char* what) {
  if (std::abs(q.norm() - 1.0) > 1e-6) {
    throw ContractError(std::string(what) + ": quaternion is not unit-norm");
  }
}

/// Angle of the relative rotation between a and b, in [0, pi].
/// Invariant to the sign of either argument.
inline double quat_geodesic(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b) {
  require_unit(a, "quat_geodesic(a)");
  require_unit(b, "quat_geodesic(b)");
  const Eigen::Quaterniond d = a.conjugate() * b;
  return 2.0 * std::atan2(d.vec().norm(), std::abs(d.w()));
}

/// Signed rotation angle of the twist of q about a unit axis, in [-pi, pi].
template <typename Scalar>
Scalar twist_angle(Quat<Scalar> q, const Vec3<Scalar>& axis) {
  using std::atan2;
  if (q.w() < Scalar(0)) q.coeffs() = -q.coeffs();
  return Scalar(2) * atan2(q.vec().dot(axis), q.w());
}

template <typename Scalar>
Quat<Scalar> canonical(Quat<Scalar> q) {
  if (q.w() < Scalar(0)) q.coeffs() = -q.coeffs();
  return q;
}

// Reflection across the sagittal plane. The skeleton frame has x forward,
// y up and z toward the character's right, so the plane is z = 0.
template <typename Scalar>
Vec3<Scalar> mirror_point(const Vec3<Scalar>& p) {
  return Vec3<Scalar>(p.x(), p.y(), -p.z());
}

// Rotation axes are pseudovectors: M R(a, t) M = R(-M a, t).
template <typename Scalar>
Vec3<Scalar> mirror_axis(const Vec3<Scalar>& a) {
  return Vec3<Scalar>(-a.x(), -a.y(), a.z());
}

template <typename Scalar>
Quat<Scalar> mirror_rotation(const Quat<Scalar>& q) {
  return Quat<Scalar>(q.w(), -q.x(), -q.y(), q.z());
}

}  // namespace signmimic
