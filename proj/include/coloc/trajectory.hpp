#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "coloc/geom.hpp"

namespace coloc {

struct TrajectorySample {
  double t = 0.0;  // seconds
  Pose pose;
};

// Timestamped pose sequence. Timestamps are strictly increasing.
struct Trajectory {
  double nominal_rate_hz = 100.0;
  std::vector<TrajectorySample> samples;

  bool empty() const { return samples.empty(); }
  std::size_t size() const { return samples.size(); }
  const TrajectorySample& operator[](std::size_t i) const { return samples[i]; }

  // Throws Error(kInvalidArgument) on non-increasing timestamps or a
  // non-positive nominal rate.
  void validate() const;
};

// CSV with header `t,px,py,pz,qw,qx,qy,qz`; seconds and meters. Values are
// written with 17 significant digits so a write/read cycle is lossless.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);
Trajectory read_trajectory_csv(std::istream& in, double nominal_rate_hz = 100.0);
Trajectory read_trajectory_csv(const std::filesystem::path& path, double nominal_rate_hz = 100.0);

// Linear interpolation of position, slerp of rotation. Outside the sampled
// range the end samples are held.
Pose interpolate(const Trajectory& traj, double t);

}  // namespace coloc
