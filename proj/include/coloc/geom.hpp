#pragma once

// Rigid-body pose algebra.
//
// Conventions used throughout the library:
//  * Quaternions are Hamilton, scalar-first when written out (w, x, y, z),
//    and act as active rotations: v' = q v q*.
//  * The in-memory world frame is the engine frame: left-handed, Y up,
//    Z forward, X right. Motion-capture data arrives right-handed Z-up and is
//    mapped with convert_handedness() at the decode boundary.
//  * Yaw is the twist of a rotation about world-up (swing-twist), never an
//    Euler angle.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <string_view>

namespace coloc {

using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;

struct Axis {
  enum class Label { kWorldUp, kForward, kRight };
  Label label;
  Vec3 vector;
};

inline const Axis kWorldUp{Axis::Label::kWorldUp, Vec3::UnitY()};
inline const Axis kForward{Axis::Label::kForward, Vec3::UnitZ()};
inline const Axis kRight{Axis::Label::kRight, Vec3::UnitX()};

// Forward axis within this distance of +-world-up leaves yaw undefined.
inline constexpr double kGimbalTolerance = 1e-6;

struct Pose {
  Quat rotation = Quat::Identity();
  Vec3 translation = Vec3::Zero();

  static Pose identity() { return {}; }
  static Pose from_translation(const Vec3& t) { return {Quat::Identity(), t}; }
  static Pose from_rotation(const Quat& q) { return {q, Vec3::Zero()}; }

  Vec3 transform_point(const Vec3& p) const { return rotation * p + translation; }
};

// Result applies b first, then a.
Pose compose(const Pose& a, const Pose& b);
Pose inverse(const Pose& p);

// Rotation about world-up by `angle` radians.
Quat yaw_rotation(double angle);
Quat axis_angle(const Vec3& axis, double angle);

// Twist angle about world-up, in (-pi, pi]. Throws Error(kUndefinedYaw) when
// the rotated forward axis is (anti)parallel to world-up.
double yaw_of(const Quat& q);
// Pure world-up rotation carrying the same yaw as q.
Quat yaw_only(const Quat& q);

// Right-handed Z-up <-> left-handed Y-up. The mapping swaps the y and z
// coordinates, so it is its own inverse.
Pose convert_handedness(const Pose& p);
Vec3 convert_handedness(const Vec3& v);
Quat convert_handedness(const Quat& q);

// Angle of the relative rotation, in [0, pi]; blind to quaternion sign.
double geodesic_angle(const Quat& a, const Quat& b);

// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

// Flips q to the hemisphere of `reference` (non-negative dot product).
Quat align_sign(const Quat& q, const Quat& reference);

bool is_finite(const Pose& p);

}  // namespace coloc
