#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "coloc/geom.hpp"
#include "coloc/trajectory.hpp"

namespace coloc::calib {

// Fixed transform from the mocap rigid body frame to the HMD eye-center
// frame: eye_world = mocap_world * transform.
struct Extrinsics {
  Pose transform;
  double rms_position_residual = 0.0;  // meters
  double rms_rotation_residual = 0.0;  // radians
  std::size_t sample_count = 0;
};

struct CalibConfig {
  std::size_t min_pairs = 50;
  double max_dt = 0.005;  // seconds
};

struct SamplePair {
  std::size_t index_a;
  std::size_t index_b;
};

struct PosePair {
  Pose mocap;
  Pose eye;
};

// Nearest-neighbour association of two timestamped streams. Candidate pairs
// closer than max_dt are accepted greedily in order of increasing |dt| so each
// sample is used at most once; the result is ordered by time.
std::vector<SamplePair> associate(const Trajectory& a, const Trajectory& b, double max_dt);

// Least-squares rigid transform T minimizing sum |b_i - T a_i|^2 (unit scale).
// Throws Error(kDegenerateGeometry) for fewer than three points or a
// collinear configuration.
Pose umeyama_align(std::span<const Vec3> points_a, std::span<const Vec3> points_b);

// Closed-form estimate from per-sample transforms inverse(mocap_i) * eye_i:
// arithmetic mean of translations, sign-aligned chordal mean of rotations.
Extrinsics estimate_extrinsics(std::span<const PosePair> pairs, const CalibConfig& cfg = {});

// Sum over pairs of |eye.t - (mocap*T).t|^2 + |R_eye - R_mocap R_T|_F^2.
double objective(std::span<const PosePair> pairs, const Pose& transform);

struct TrajectoryCalibration {
  Extrinsics extrinsics;
  // Maps eye-trajectory coordinates into the mocap world frame. Identity when
  // pre-alignment is disabled.
  Pose eye_frame_to_world;
  std::size_t pair_count = 0;
  int iterations = 0;
};

struct TrajectoryCalibConfig {
  CalibConfig calib;
  // Register the eye trajectory onto the mocap world frame first (needed
  // when the eye poses come from a device tracking frame).
  bool prealign = false;
  int max_iterations = 20;
  // Shift applied to mocap timestamps before association (transport delay).
  double mocap_delay = 0.0;
};

// Full pipeline over two trajectories: association, optional pre-alignment
// and extrinsics estimation. With pre-alignment the frame registration and
// the extrinsics are refined alternately, since the mocap body and the eye
// center do not share an origin.
TrajectoryCalibration calibrate(const Trajectory& mocap, const Trajectory& eye,
                                const TrajectoryCalibConfig& cfg = {});

}  // namespace coloc::calib
