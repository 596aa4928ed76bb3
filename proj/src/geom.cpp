#include "coloc/geom.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "coloc/error.hpp"

namespace coloc {

Pose compose(const Pose& a, const Pose& b) {
  Pose out;
  out.rotation = (a.rotation * b.rotation).normalized();
  out.translation = a.translation + a.rotation * b.translation;
  return out;
}

Pose inverse(const Pose& p) {
  Pose out;
  out.rotation = p.rotation.conjugate().normalized();
  out.translation = -(out.rotation * p.translation);
  return out;
}

Quat axis_angle(const Vec3& axis, double angle) {
  return Quat(Eigen::AngleAxisd(angle, axis.normalized()));
}

Quat yaw_rotation(double angle) {
  const double h = 0.5 * angle;
  // Built by hand so the x and z components are exactly zero.
  return Quat(std::cos(h), 0.0, std::sin(h), 0.0);
}

double wrap_angle(double a) {
  constexpr double kPi = std::numbers::pi;
  a = std::remainder(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

namespace {

// Twist of q about world-up as (w, component along up), unnormalized.
std::pair<double, double> twist_about_up(const Quat& q) {
  const Vec3& up = kWorldUp.vector;
  const Vec3 fwd = q * kForward.vector;
  if (fwd.cross(up).norm() < kGimbalTolerance) {
    throw Error(ErrorCode::kUndefinedYaw, "yaw undefined: forward axis parallel to world-up");
  }
  const double w = q.w();
  const double along = q.vec().dot(up);
  if (std::hypot(w, along) < 1e-12) {
    throw Error(ErrorCode::kUndefinedYaw, "yaw undefined: half-turn swing");
  }
  return {w, along};
}

}  // namespace

double yaw_of(const Quat& q) {
  const auto [w, along] = twist_about_up(q);
  return wrap_angle(2.0 * std::atan2(along, w));
}

Quat yaw_only(const Quat& q) {
  auto [w, along] = twist_about_up(q);
  if (w < 0.0) {
    w = -w;
    along = -along;
  }
  const double n = std::hypot(w, along);
  return Quat(w / n, 0.0, along / n, 0.0);
}

Vec3 convert_handedness(const Vec3& v) { return {v.x(), v.z(), v.y()}; }

Quat convert_handedness(const Quat& q) {
  // Conjugating a rotation by an improper permutation P gives the rotation
  // about -P*axis with the same angle.
  return Quat(q.w(), -q.x(), -q.z(), -q.y());
}

Pose convert_handedness(const Pose& p) {
  return {convert_handedness(p.rotation), convert_handedness(p.translation)};
}

double geodesic_angle(const Quat& a, const Quat& b) {
  const Quat rel = a.conjugate() * b;
  return 2.0 * std::atan2(rel.vec().norm(), std::abs(rel.w()));
}

Quat align_sign(const Quat& q, const Quat& reference) {
  if (q.dot(reference) < 0.0) return Quat(-q.w(), -q.x(), -q.y(), -q.z());
  return q;
}

bool is_finite(const Pose& p) {
  return p.translation.allFinite() && p.rotation.coeffs().allFinite();
}

}  // namespace coloc
