#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "coloc/geom.hpp"
#include "coloc/trajectory.hpp"

namespace coloc::test {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kDeg = kPi / 180.0;

inline Quat random_quat(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Quat q(g(rng), g(rng), g(rng), g(rng));
  return q.normalized();
}

inline Vec3 random_vec(std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng)};
}

inline Pose random_pose(std::mt19937_64& rng, double scale = 3.0) {
  return {random_quat(rng), random_vec(rng, scale)};
}

inline double pos_err(const Pose& a, const Pose& b) { return (a.translation - b.translation).norm(); }
inline double rot_err(const Pose& a, const Pose& b) { return geodesic_angle(a.rotation, b.rotation); }

inline Quat rot_x(double a) { return Quat(Eigen::AngleAxisd(a, Vec3::UnitX())); }
inline Quat rot_y(double a) { return Quat(Eigen::AngleAxisd(a, Vec3::UnitY())); }
inline Quat rot_z(double a) { return Quat(Eigen::AngleAxisd(a, Vec3::UnitZ())); }

inline Trajectory grid_trajectory(double rate, std::size_t n, double t0 = 0.0) {
  Trajectory traj;
  traj.nominal_rate_hz = rate;
  for (std::size_t i = 0; i < n; ++i) traj.samples.push_back({t0 + static_cast<double>(i) / rate, Pose{}});
  return traj;
}

}  // namespace coloc::test
