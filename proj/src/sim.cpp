#include "coloc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "coloc/error.hpp"

namespace coloc::sim {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kStepFrequency = 2.0;  // Hz
constexpr double kNodFrequency = 0.25;  // Hz

// Fist-bump script.
constexpr double kContactSeparation = 0.6;  // head-to-head distance at contact
constexpr double kReachHalfWindow = 0.6;    // s
const Vec3 kRightHandRest(0.2, -0.45, 0.25);  // right, up, forward
const Vec3 kLeftHandRest(-0.2, -0.45, 0.25);
constexpr double kContactDrop = 0.35;  // contact point below head height

void invalid(const std::string& what) { throw Error(ErrorCode::kInvalidArgument, what); }

// Forward surge locked to whole step cycles per leg, so legs (line ends,
// square corners, laps) are reached at exact multiples of leg_time.
struct Gait {
  double speed = 0.0;
  double surge = 0.0;
  double frequency = kStepFrequency;
  double bob = 0.0;

  Gait(const MotionSpec& spec, double leg_time) : speed(spec.speed), bob(spec.gait_bob) {
    const double cycles = std::max(1.0, std::round(kStepFrequency * leg_time));
    frequency = cycles / leg_time;
    // Keep ds/dt > 0.
    surge = std::min(spec.gait_surge, 0.5 * spec.speed / (2.0 * kPi * frequency));
  }

  double distance(double t) const {
    return speed * t + (surge > 0.0 ? surge * std::sin(2.0 * kPi * frequency * t) : 0.0);
  }
  double height(double base, double t) const {
    return bob > 0.0 ? base + bob * std::sin(2.0 * kPi * frequency * t + 0.3) : base;
  }
};

Quat head_rotation(const MotionSpec& spec, double heading, double t) {
  double pitch = spec.look_down;
  if (spec.nod_amplitude > 0.0) pitch += spec.nod_amplitude * std::sin(2.0 * kPi * kNodFrequency * t);
  if (pitch == 0.0) return yaw_rotation(heading);
  return (yaw_rotation(heading) * axis_angle(kRight.vector, pitch)).normalized();
}

// Heading-change progress: number of turns completed by time t when turns
// are centred on multiples of `period`, each spread over kTurnWindow.
double turns_completed(double t, double period) {
  const double half = 0.5 * kTurnWindow;
  const double full = std::floor((t - half) / period);  // turns fully done
  double turns = std::max(0.0, full);
  const double next = std::max(1.0, full + 1.0);
  const double start = next * period - half;
  if (t > start) turns += std::min(1.0, (t - start) / kTurnWindow);
  return turns;
}

double heading_towards(const Vec3& direction) { return std::atan2(direction.x(), direction.z()); }

Trajectory make_trajectory(const MotionSpec& spec) {
  Trajectory traj;
  traj.nominal_rate_hz = spec.rate;
  traj.samples.reserve(spec.sample_count());
  return traj;
}

GeneratedMotion gen_line(const MotionSpec& spec) {
  const double length = spec.extent;
  const double leg = length / spec.speed;
  const Gait gait(spec, leg);
  GeneratedMotion out;
  UserMotion user{make_trajectory(spec), std::nullopt, std::nullopt};
  for (std::size_t k = 0; k < spec.sample_count(); ++k) {
    const double t = static_cast<double>(k) / spec.rate;
    const double phase = std::fmod(gait.distance(t), 2.0 * length);
    const double x = phase <= length ? phase : 2.0 * length - phase;
    const double heading = wrap_angle(0.5 * kPi + kPi * turns_completed(t, leg));
    Pose p;
    p.translation = Vec3(x, gait.height(spec.head_height, t), 0.0);
    p.rotation = head_rotation(spec, heading, t);
    user.head.samples.push_back({t, p});
  }
  out.users.push_back(std::move(user));
  return out;
}

GeneratedMotion gen_circle(const MotionSpec& spec) {
  const double radius = spec.extent;
  const double lap = 2.0 * kPi * radius / spec.speed;
  const Gait gait(spec, lap);
  GeneratedMotion out;
  UserMotion user{make_trajectory(spec), std::nullopt, std::nullopt};
  for (std::size_t k = 0; k < spec.sample_count(); ++k) {
    const double t = static_cast<double>(k) / spec.rate;
    const double angle = gait.distance(t) / radius;
    const double x = radius * std::cos(angle);
    const double z = radius * std::sin(angle);
    Pose p;
    p.translation = Vec3(x, gait.height(spec.head_height, t), z);
    p.rotation = head_rotation(spec, heading_towards(Vec3(-x, 0.0, -z)), t);
    user.head.samples.push_back({t, p});
  }
  out.users.push_back(std::move(user));
  return out;
}

GeneratedMotion gen_patrol(const MotionSpec& spec) {
  const double side = spec.extent;
  const double leg = side / spec.speed;
  const Gait gait(spec, leg);
  const double h = 0.5 * side;
  const Vec3 corners[5] = {{-h, 0, -h}, {h, 0, -h}, {h, 0, h}, {-h, 0, h}, {-h, 0, -h}};
  GeneratedMotion out;
  UserMotion user{make_trajectory(spec), std::nullopt, std::nullopt};
  for (std::size_t k = 0; k < spec.sample_count(); ++k) {
    const double t = static_cast<double>(k) / spec.rate;
    const double s = std::fmod(gait.distance(t), 4.0 * side);
    const int seg = std::min(3, static_cast<int>(s / side));
    const double u = (s - seg * side) / side;
    Vec3 pos = corners[seg] + u * (corners[seg + 1] - corners[seg]);
    pos.y() = gait.height(spec.head_height, t);
    // Sides run +x, +z, -x, -z: heading 90, 0, -90, 180 degrees.
    const double heading = wrap_angle(0.5 * kPi - 0.5 * kPi * turns_completed(t, leg));
    user.head.samples.push_back({t, Pose{head_rotation(spec, heading, t), pos}});
  }
  out.users.push_back(std::move(user));
  return out;
}

GeneratedMotion gen_fistbump(const MotionSpec& spec) {
  constexpr int kEvents = 4;
  const double cycle = spec.duration / kEvents;
  const double far = spec.extent;
  const double near = kContactSeparation;
  const Gait gait(spec, cycle);

  GeneratedMotion out;
  const double contact_height = spec.head_height - kContactDrop;
  for (int e = 0; e < kEvents; ++e) {
    ContactEvent ev;
    ev.frame = static_cast<std::size_t>(std::llround((e + 0.5) * cycle * spec.rate));
    ev.t = static_cast<double>(ev.frame) / spec.rate;
    ev.point = Vec3(0.0, contact_height, 0.0);
    out.contacts.push_back(ev);
  }

  const double headings[2] = {0.5 * kPi, -0.5 * kPi};
  const double sides[2] = {-1.0, 1.0};
  for (int u = 0; u < 2; ++u) {
    UserMotion user{make_trajectory(spec), make_trajectory(spec), make_trajectory(spec)};
    const Quat yaw = yaw_rotation(headings[u]);
    for (std::size_t k = 0; k < spec.sample_count(); ++k) {
      const double t = static_cast<double>(k) / spec.rate;
      const double phase = (t - out.contacts.front().t) / cycle;
      const double separation = near + (far - near) * 0.5 * (1.0 - std::cos(2.0 * kPi * phase));
      Pose head;
      head.translation = Vec3(sides[u] * 0.5 * separation, gait.height(spec.head_height, t), 0.0);
      head.rotation = head_rotation(spec, headings[u], t);
      user.head.samples.push_back({t, head});

      const Vec3 right_rest = head.translation + yaw * kRightHandRest;
      const Vec3 left_rest = head.translation + yaw * kLeftHandRest;
      double reach = 0.0;
      const ContactEvent* nearest = &out.contacts.front();
      for (const auto& c : out.contacts) {
        if (std::abs(t - c.t) < std::abs(t - nearest->t)) nearest = &c;
      }
      if (k == nearest->frame) {
        reach = 1.0;
      } else if (std::abs(t - nearest->t) < kReachHalfWindow) {
        reach = 0.5 * (1.0 + std::cos(kPi * (t - nearest->t) / kReachHalfWindow));
      }
      const Vec3 right = (1.0 - reach) * right_rest + reach * nearest->point;
      user.right_hand->samples.push_back({t, Pose{yaw, right}});
      user.left_hand->samples.push_back({t, Pose{yaw, left_rest}});
    }
    out.users.push_back(std::move(user));
  }
  return out;
}

}  // namespace

const char* to_string(MotionKind kind) {
  switch (kind) {
    case MotionKind::kLine: return "line";
    case MotionKind::kCircle: return "circle";
    case MotionKind::kPatrol: return "patrol";
    case MotionKind::kFistbump: return "fistbump";
  }
  return "unknown";
}

MotionKind motion_kind_from_string(const std::string& name) {
  for (MotionKind k : {MotionKind::kLine, MotionKind::kCircle, MotionKind::kPatrol, MotionKind::kFistbump}) {
    if (name == to_string(k)) return k;
  }
  invalid("unknown motion kind '" + name + "'");
  return MotionKind::kLine;
}

std::size_t MotionSpec::sample_count() const {
  return static_cast<std::size_t>(std::floor(duration * rate + 1e-9)) + 1;
}

void MotionSpec::validate() const {
  if (!(speed > 0.0)) invalid("scenario.speed must be > 0");
  if (!(rate > 0.0)) invalid("scenario.rate must be > 0");
  if (!(duration > 0.0)) invalid("scenario.duration must be > 0");
  if (!(extent > 0.0)) invalid("scenario.extent must be > 0");
  if (!(head_height > 0.0)) invalid("scenario.head_height must be > 0");
  if (gait_surge < 0.0 || gait_bob < 0.0 || nod_amplitude < 0.0) invalid("scenario gait terms must be >= 0");
  const double footprint = kind == MotionKind::kCircle ? 2.0 * extent : extent;
  if (footprint > kAreaSize) invalid("scenario.extent does not fit the 7 x 7 m area");
  switch (kind) {
    case MotionKind::kLine:
    case MotionKind::kPatrol:
      if (extent / speed <= kTurnWindow) invalid("scenario legs shorter than the turn window");
      break;
    case MotionKind::kCircle:
      break;
    case MotionKind::kFistbump:
      if (extent <= kContactSeparation) invalid("fistbump extent must exceed the contact separation");
      if (duration / 4.0 <= 2.0 * kReachHalfWindow) invalid("fistbump duration too short for four events");
      break;
  }
  if (std::abs(look_down) + nod_amplitude >= 0.5 * std::numbers::pi - 0.01) {
    invalid("head pitch reaches the vertical");
  }
}

GeneratedMotion gen_motion(const MotionSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case MotionKind::kLine: return gen_line(spec);
    case MotionKind::kCircle: return gen_circle(spec);
    case MotionKind::kPatrol: return gen_patrol(spec);
    case MotionKind::kFistbump: return gen_fistbump(spec);
  }
  return {};
}

void DriftConfig::validate() const {
  if (position_drift_rate < 0.0 || white_noise_pos < 0.0) {
    invalid("drift rates and noise must be >= 0");
  }
  if (mode == DriftMode::kLinear && position_drift_rate > 0.0 && !(bias_direction.norm() > 0.0)) {
    invalid("drift.bias_direction must be non-zero");
  }
}

bool DriftConfig::is_zero() const {
  const Pose id;
  return position_drift_rate == 0.0 && yaw_drift_rate == 0.0 && white_noise_pos == 0.0 &&
         !tracking_loss && device_frame_offset.translation == id.translation &&
         device_frame_offset.rotation.coeffs() == id.rotation.coeffs();
}

std::vector<Pose> sample_drift(const std::vector<double>& times, const DriftConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Pose> out;
  out.reserve(times.size());
  if (times.empty()) return out;

  const Vec3 dir = cfg.bias_direction.norm() > 0.0 ? cfg.bias_direction.normalized() : Vec3::UnitX();
  Vec3 walk = Vec3::Zero();
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double elapsed = times[k] - times.front();
    if (cfg.mode == DriftMode::kRandomWalk && k > 0 && cfg.position_drift_rate > 0.0) {
      const double sd = cfg.position_drift_rate * std::sqrt(times[k] - times[k - 1]);
      walk += Vec3(gauss(rng), gauss(rng), gauss(rng)) * sd;
    }
    Pose d;
    d.rotation = yaw_rotation(cfg.yaw_drift_rate * elapsed);
    d.translation = cfg.mode == DriftMode::kLinear ? Vec3(cfg.position_drift_rate * elapsed * dir) : walk;
    if (cfg.tracking_loss && times[k] >= cfg.tracking_loss->time) d = compose(cfg.tracking_loss->jump, d);
    out.push_back(compose(cfg.device_frame_offset, d));
  }
  return out;
}

Trajectory apply_drift(const Trajectory& gt, const std::vector<Pose>& drift, double white_noise_pos,
                       std::mt19937_64& rng) {
  if (drift.size() != gt.size()) invalid("apply_drift: drift and trajectory lengths differ");
  std::normal_distribution<double> gauss(0.0, 1.0);
  Trajectory out;
  out.nominal_rate_hz = gt.nominal_rate_hz;
  out.samples.reserve(gt.size());
  for (std::size_t k = 0; k < gt.size(); ++k) {
    Pose p = compose(drift[k], gt[k].pose);
    if (white_noise_pos > 0.0) p.translation += Vec3(gauss(rng), gauss(rng), gauss(rng)) * white_noise_pos;
    out.samples.push_back({gt[k].t, p});
  }
  return out;
}

Trajectory slam_track(const Trajectory& gt, const DriftConfig& cfg) {
  cfg.validate();
  if (cfg.is_zero()) return gt;
  std::vector<double> times;
  times.reserve(gt.size());
  for (const auto& s : gt.samples) times.push_back(s.t);
  const auto drift = sample_drift(times, cfg);
  std::mt19937_64 noise_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  return apply_drift(gt, drift, cfg.white_noise_pos, noise_rng);
}

void MocapObserverConfig::validate() const {
  if (!(rate > 0.0)) invalid("mocap.rate must be > 0");
  if (latency_frames < 0) invalid("mocap.latency_frames must be >= 0");
  if (jitter_frames < 0) invalid("mocap.jitter_frames must be >= 0");
  if (noise_pos < 0.0 || noise_rot < 0.0) invalid("mocap noise must be >= 0");
}

Quat random_rotation(std::mt19937_64& rng, double sigma) {
  std::normal_distribution<double> gauss(0.0, sigma);
  const Vec3 v(gauss(rng), gauss(rng), gauss(rng));
  const double angle = v.norm();
  if (angle == 0.0) return Quat::Identity();
  return Quat(Eigen::AngleAxisd(angle, v / angle));
}

MocapObservation mocap_observe(const Trajectory& gt, const Pose& extrinsics_inv,
                               const MocapObserverConfig& cfg) {
  cfg.validate();
  if (gt.empty()) invalid("mocap_observe: empty trajectory");
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> jitter(0, cfg.jitter_frames);

  // Same grid as the ground truth when rates agree; otherwise resample.
  std::vector<TrajectorySample> truth;
  if (std::abs(gt.nominal_rate_hz - cfg.rate) < 1e-9) {
    truth = gt.samples;
  } else {
    const double t0 = gt.samples.front().t;
    const double t1 = gt.samples.back().t;
    for (std::size_t k = 0;; ++k) {
      const double t = t0 + static_cast<double>(k) / cfg.rate;
      if (t > t1 + 1e-12) break;
      truth.push_back({t, interpolate(gt, t)});
    }
  }

  MocapObservation out;
  out.available.nominal_rate_hz = cfg.rate;
  for (const auto& s : truth) {
    Pose body = convert_handedness(compose(s.pose, extrinsics_inv));
    if (cfg.noise_pos > 0.0) body.translation += Vec3(gauss(rng), gauss(rng), gauss(rng)) * cfg.noise_pos;
    if (cfg.noise_rot > 0.0) body.rotation = (body.rotation * random_rotation(rng, cfg.noise_rot)).normalized();
    const int delay = cfg.latency_frames + (cfg.jitter_frames > 0 ? jitter(rng) : 0);
    double t = s.t + static_cast<double>(delay) / cfg.rate;
    // Transport keeps order: a packet can't overtake its predecessor.
    if (!out.available.samples.empty()) t = std::max(t, std::nextafter(out.available.samples.back().t, 1e300));
    out.available.samples.push_back({t, body});
    out.capture_times.push_back(s.t);
    out.delay_frames.push_back(delay);
  }
  return out;
}

}  // namespace coloc::sim
