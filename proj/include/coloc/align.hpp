#pragma once

#include <numbers>

#include "coloc/calib.hpp"
#include "coloc/geom.hpp"

namespace coloc::align {

// Discrepancy between the aligned camera and the mocap-derived eye pose.
struct Residual {
  double position_error = 0.0;  // meters, >= 0
  double yaw_error = 0.0;       // radians, signed, (-pi, pi]
};

enum class CorrectionMode { kSnap, kSmooth };

struct CorrectionConfig {
  double position_threshold = 0.03;                  // meters
  double yaw_threshold = 5.0 * std::numbers::pi / 180.0;  // radians
  int sustain_frames = 30;
  CorrectionMode mode = CorrectionMode::kSmooth;
  double smooth_duration = 0.5;  // seconds

  // Throws Error(kInvalidArgument) when a field is out of range.
  void validate() const;
};

enum class Phase { kMonitoring, kCorrecting };

struct AlignmentState {
  Pose origin;  // XR-origin world transform
  Phase phase = Phase::kMonitoring;
  double progress = 0.0;  // in [0, 1] while correcting
  int consecutive_violations = 0;
  Residual last_residual;
  Pose correction_start;  // origin when the running correction began
};

// Eye-center world pose from a mocap body pose.
Pose eye_world(const Pose& mocap, const calib::Extrinsics& extrinsics);

// Origin such that origin * cam_local == eye_world (full 6-DoF).
Pose solve_origin_full(const Pose& eye_w, const Pose& cam_local);

// Origin restricted to position + yaw. The aligned camera matches the eye
// position and yaw exactly, and keeps the device's own pitch and roll, so
// the tracking space stays level.
Pose solve_origin_leveled(const Pose& eye_w, const Pose& cam_local);

Residual drift_residual(const Pose& cam_world, const Pose& eye_w_ref);

bool exceeds(const Residual& r, const CorrectionConfig& cfg);

// One tick of the drift monitor. In monitoring, sustained threshold
// violations switch to correcting; the correction itself starts on the next
// tick. Snap replaces the origin in one tick; smooth blends from the origin at
// the start of the correction toward target_origin over smooth_duration.
AlignmentState correction_step(const AlignmentState& state, const Residual& residual,
                               const Pose& target_origin, const CorrectionConfig& cfg, double dt);

// Position lerp + rotation slerp between two poses.
Pose interpolate_pose(const Pose& from, const Pose& to, double u);

}  // namespace coloc::align
