#include "coloc/align.hpp"

#include <algorithm>
#include <cmath>

#include "coloc/error.hpp"

namespace coloc::align {

void CorrectionConfig::validate() const {
  if (!(position_threshold > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "correction.position_threshold must be > 0");
  }
  if (!(yaw_threshold > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "correction.yaw_threshold must be > 0");
  }
  if (sustain_frames < 1) {
    throw Error(ErrorCode::kInvalidArgument, "correction.sustain_frames must be >= 1");
  }
  if (!(smooth_duration > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "correction.smooth_duration must be > 0");
  }
}

Pose eye_world(const Pose& mocap, const calib::Extrinsics& extrinsics) {
  return compose(mocap, extrinsics.transform);
}

Pose solve_origin_full(const Pose& eye_w, const Pose& cam_local) {
  return compose(eye_w, inverse(cam_local));
}

Pose solve_origin_leveled(const Pose& eye_w, const Pose& cam_local) {
  Pose origin;
  origin.rotation = yaw_rotation(wrap_angle(yaw_of(eye_w.rotation) - yaw_of(cam_local.rotation)));
  origin.translation = eye_w.translation - origin.rotation * cam_local.translation;
  return origin;
}

Residual drift_residual(const Pose& cam_world, const Pose& eye_w_ref) {
  Residual r;
  r.position_error = (cam_world.translation - eye_w_ref.translation).norm();
  r.yaw_error = wrap_angle(yaw_of(cam_world.rotation) - yaw_of(eye_w_ref.rotation));
  return r;
}

bool exceeds(const Residual& r, const CorrectionConfig& cfg) {
  return r.position_error > cfg.position_threshold || std::abs(r.yaw_error) > cfg.yaw_threshold;
}

Pose interpolate_pose(const Pose& from, const Pose& to, double u) {
  Pose out;
  out.translation = from.translation + u * (to.translation - from.translation);
  out.rotation = from.rotation.slerp(u, align_sign(to.rotation, from.rotation)).normalized();
  return out;
}

AlignmentState correction_step(const AlignmentState& state, const Residual& residual,
                               const Pose& target_origin, const CorrectionConfig& cfg, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::kInvalidArgument, "correction_step: dt must be > 0");
  AlignmentState next = state;
  next.last_residual = residual;

  if (state.phase == Phase::kMonitoring) {
    next.consecutive_violations = exceeds(residual, cfg) ? state.consecutive_violations + 1 : 0;
    if (next.consecutive_violations >= cfg.sustain_frames) {
      next.phase = Phase::kCorrecting;
      next.progress = 0.0;
      next.correction_start = state.origin;
    }
    return next;
  }

  // Accumulated progress can land a few ulps short of 1 after many steps.
  constexpr double kDone = 1.0 - 1e-9;
  const double progress =
      cfg.mode == CorrectionMode::kSnap ? 1.0 : std::min(1.0, state.progress + dt / cfg.smooth_duration);
  if (progress >= kDone) {
    next.origin = target_origin;
    next.phase = Phase::kMonitoring;
    next.progress = 0.0;
    next.consecutive_violations = 0;
    return next;
  }
  next.progress = progress;
  next.origin = interpolate_pose(state.correction_start, target_origin, progress);
  return next;
}

}  // namespace coloc::align
