#pragma once

// Deterministic synthetic world: scripted head/controller motion, a drifting
// inside-out tracker and a delayed, noisy motion-capture observer.
//
// Ground truth lives in the engine world frame (LH, Y up). The tracking area
// is a 7 x 7 m square centred on the world origin.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "coloc/geom.hpp"
#include "coloc/trajectory.hpp"

namespace coloc::sim {

inline constexpr double kAreaSize = 7.0;  // meters
inline constexpr double kTurnWindow = 0.5;  // seconds

enum class MotionKind { kLine, kCircle, kPatrol, kFistbump };

const char* to_string(MotionKind kind);
MotionKind motion_kind_from_string(const std::string& name);

struct MotionSpec {
  MotionKind kind = MotionKind::kCircle;
  // Line length, circle radius, square side, or the far head separation of
  // the two fist-bump users.
  double extent = 2.0;
  double speed = 1.0;      // m/s
  double duration = 60.0;  // s
  double rate = 100.0;     // Hz
  double head_height = 1.7;
  // Walking gait: forward surge amplitude and vertical head bob (meters) at
  // roughly 2 steps/s. Zero disables either.
  double gait_surge = 0.015;
  double gait_bob = 0.02;
  // Head pitch: constant downward gaze plus a slow nod (radians).
  double look_down = 0.15;
  double nod_amplitude = 0.08;

  void validate() const;
  std::size_t sample_count() const;
};

struct ContactEvent {
  std::size_t frame = 0;
  double t = 0.0;
  Vec3 point = Vec3::Zero();
};

struct UserMotion {
  Trajectory head;  // eye-center world pose
  std::optional<Trajectory> left_hand;
  std::optional<Trajectory> right_hand;
};

struct GeneratedMotion {
  std::vector<UserMotion> users;  // one for circuits, two for fist-bump
  std::vector<ContactEvent> contacts;
};

GeneratedMotion gen_motion(const MotionSpec& spec);

enum class DriftMode { kRandomWalk, kLinear };

struct TrackingLoss {
  double time = 0.0;  // s
  Pose jump;          // applied on top of the accumulated drift from `time` on
};

struct DriftConfig {
  DriftMode mode = DriftMode::kRandomWalk;
  // Random walk: per-axis sigma in m/sqrt(s). Linear: speed in m/s along
  // bias_direction.
  double position_drift_rate = 0.0;
  Vec3 bias_direction = Vec3::UnitX();
  double yaw_drift_rate = 0.0;   // rad/s, deterministic heading drift
  double white_noise_pos = 0.0;  // m, per-sample sigma
  std::optional<TrackingLoss> tracking_loss;
  // Registration of the device tracking frame at t = 0: cam_local = offset * world.
  Pose device_frame_offset;
  std::uint64_t seed = 1;

  void validate() const;
  bool is_zero() const;
};

// Device-frame drift transform D(t) such that cam_local(t) = D(t) * truth(t),
// before white noise.
std::vector<Pose> sample_drift(const std::vector<double>& times, const DriftConfig& cfg);

// Applies a sampled drift (same length as gt) plus white position noise.
Trajectory apply_drift(const Trajectory& gt, const std::vector<Pose>& drift, double white_noise_pos,
                       std::mt19937_64& rng);

// Device-frame camera poses for a ground-truth eye trajectory. All-zero
// config returns the input unchanged.
Trajectory slam_track(const Trajectory& gt, const DriftConfig& cfg);

struct MocapObserverConfig {
  double rate = 100.0;
  double noise_pos = 5e-4;  // m
  double noise_rot = 0.0;   // rad, per-axis sigma of a small rotation
  int latency_frames = 7;
  int jitter_frames = 0;
  std::uint64_t seed = 2;

  void validate() const;
};

struct MocapObservation {
  // Mocap body poses, RH Z-up, stamped with the time they become available
  // to the client (capture time + transport delay).
  Trajectory available;
  std::vector<double> capture_times;
  std::vector<int> delay_frames;
};

// Observes the mocap body rigidly attached to the eye center:
// body = eye * extrinsics_inv, converted to RH Z-up, noised and delayed.
MocapObservation mocap_observe(const Trajectory& gt, const Pose& extrinsics_inv,
                               const MocapObserverConfig& cfg);

// Small random rotation with per-axis sigma (radians).
Quat random_rotation(std::mt19937_64& rng, double sigma);

}  // namespace coloc::sim
