#include "coloc/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>

#include "coloc/error.hpp"
#include "coloc/net/hub.hpp"
#include "coloc/net/packet.hpp"
#include "coloc/net/session.hpp"

namespace coloc::pipeline {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream per (run seed, component seed, user, purpose).
std::uint64_t derive_seed(std::uint64_t run_seed, std::uint64_t component_seed, int user, std::uint64_t salt) {
  std::uint64_t s = splitmix64(run_seed);
  s = splitmix64(s ^ component_seed);
  s = splitmix64(s ^ static_cast<std::uint64_t>(user));
  return splitmix64(s ^ salt);
}

constexpr double kCalibrationSquare = 2.0;  // m
constexpr double kCalibrationNod = 0.35;    // rad
constexpr int kLagRefineFrames = 2;

enum Salt : std::uint64_t { kDriftSalt = 1, kMocapSalt = 2, kCalDriftSalt = 3, kCalMocapSalt = 4, kPacketSalt = 5 };

Trajectory rotate_about_up(const Trajectory& traj, double angle) {
  if (angle == 0.0) return traj;
  const Pose r = Pose::from_rotation(yaw_rotation(angle));
  Trajectory out = traj;
  for (auto& s : out.samples) s.pose = compose(r, s.pose);
  return out;
}

std::vector<double> times_of(const Trajectory& traj) {
  std::vector<double> t;
  t.reserve(traj.size());
  for (const auto& s : traj.samples) t.push_back(s.t);
  return t;
}

// Each user's device registers its tracking frame somewhere different.
sim::DriftConfig user_drift(const RunConfig& cfg, int index, std::uint64_t salt) {
  sim::DriftConfig d = cfg.drift;
  d.seed = derive_seed(cfg.seed, cfg.drift.seed, index, salt);
  if (index > 0) {
    const Pose shift{yaw_rotation(0.7 * index), Vec3(0.25 * index, 0.0, -0.15 * index)};
    d.device_frame_offset = compose(shift, d.device_frame_offset);
  }
  return d;
}

sim::MocapObserverConfig user_mocap(const RunConfig& cfg, int index, std::uint64_t salt) {
  sim::MocapObserverConfig m = cfg.mocap;
  m.seed = derive_seed(cfg.seed, cfg.mocap.seed, index, salt);
  // Transport delay is applied per packet by the stream, not per body.
  m.latency_frames = 0;
  m.jitter_frames = 0;
  return m;
}

struct DeviceTracks {
  Trajectory head;
  std::optional<Trajectory> left;
  std::optional<Trajectory> right;
};

// The same device drift moves head and controllers, since controllers are
// tracked relative to the headset.
DeviceTracks track_device(const sim::UserMotion& motion, const sim::DriftConfig& drift) {
  DeviceTracks out;
  if (drift.is_zero()) {
    out.head = motion.head;
    out.left = motion.left_hand;
    out.right = motion.right_hand;
    return out;
  }
  const auto d = sim::sample_drift(times_of(motion.head), drift);
  std::mt19937_64 rng(splitmix64(drift.seed));
  out.head = sim::apply_drift(motion.head, d, drift.white_noise_pos, rng);
  if (motion.left_hand) out.left = sim::apply_drift(*motion.left_hand, d, drift.white_noise_pos, rng);
  if (motion.right_hand) out.right = sim::apply_drift(*motion.right_hand, d, drift.white_noise_pos, rng);
  return out;
}

Trajectory to_engine(const Trajectory& rh) {
  Trajectory out = rh;
  for (auto& s : out.samples) s.pose = convert_handedness(s.pose);
  return out;
}

struct Calibration {
  calib::Extrinsics extrinsics;
  eval::LatencyEstimate latency;
};

// Pre-calibration session: the user walks a square with pronounced nodding so
// the mount lever arm is observable, while both systems record. The first
// latency estimate correlates different body points (eye vs marker body);
// once a first extrinsics estimate exists, the mocap stream is mapped to the
// eye center and the latency and extrinsics are estimated again.
Calibration pre_calibrate(const RunConfig& cfg, int index) {
  Calibration out;
  if (!cfg.calibration.estimate) {
    out.extrinsics.transform = cfg.extrinsics;
    out.latency.rate = cfg.mocap.rate;
    out.latency.lag_frames = cfg.mocap.latency_frames;
    out.latency.latency = cfg.mocap.latency_frames / cfg.mocap.rate;
    out.latency.peak_correlation = 1.0;
    return out;
  }
  sim::MotionSpec spec = cfg.scenario;
  spec.kind = sim::MotionKind::kPatrol;
  spec.extent = kCalibrationSquare;
  spec.look_down = 0.1;
  spec.nod_amplitude = kCalibrationNod;
  spec.duration = cfg.calibration.seconds;
  const auto motion = sim::gen_motion(spec);
  const auto drift = user_drift(cfg, index, kCalDriftSalt);
  const Trajectory cam = track_device(motion.users.front(), drift).head;

  auto mocap_cfg = user_mocap(cfg, index, kCalMocapSalt);
  mocap_cfg.latency_frames = cfg.mocap.latency_frames;
  mocap_cfg.jitter_frames = cfg.mocap.jitter_frames;
  const auto obs = sim::mocap_observe(motion.users.front().head, inverse(cfg.extrinsics), mocap_cfg);
  const Trajectory mocap = to_engine(obs.available);

  calib::TrajectoryCalibConfig tc;
  tc.calib.min_pairs = cfg.calibration.min_pairs;
  tc.calib.max_dt = cfg.calibration.max_dt;
  tc.prealign = true;

  out.latency = eval::estimate_latency(cam, mocap, cfg.mocap.rate, cfg.max_lag_frames);
  tc.mocap_delay = out.latency.latency;
  out.extrinsics = calib::calibrate(mocap, cam, tc).extrinsics;

  Trajectory eye_from_mocap = mocap;
  for (auto& s : eye_from_mocap.samples) s.pose = compose(s.pose, out.extrinsics.transform);
  out.latency = eval::estimate_latency(cam, eye_from_mocap, cfg.mocap.rate, cfg.max_lag_frames);

  // The correlation peak is flat within a frame or two under tracker noise;
  // the lag that best explains the poses themselves is kept.
  const int center = out.latency.lag_frames;
  double best = std::numeric_limits<double>::infinity();
  for (int lag = std::max(0, center - kLagRefineFrames); lag <= center + kLagRefineFrames; ++lag) {
    tc.mocap_delay = lag / cfg.mocap.rate;
    calib::TrajectoryCalibration candidate;
    try {
      candidate = calib::calibrate(mocap, cam, tc);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInsufficientData) throw;
      continue;
    }
    if (candidate.extrinsics.rms_position_residual < best) {
      best = candidate.extrinsics.rms_position_residual;
      out.extrinsics = candidate.extrinsics;
      out.latency.lag_frames = lag;
      out.latency.latency = tc.mocap_delay;
    }
  }
  return out;
}

struct ClientState {
  net::PacketDecoder decoder;
  net::SessionState session;
  align::AlignmentState alignment;
  bool aligned = false;
  Pose initial_origin;
  Pose eye_w;
  std::size_t cam_ref_index = 0;
};

Vec3 nan_vec() { return Vec3::Constant(kNaN); }

Trajectory shift_times(const Trajectory& traj, double dt) {
  Trajectory out = traj;
  for (auto& s : out.samples) s.t -= dt;
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open for writing: " + path.string());
  out << text;
  out.close();
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

}  // namespace

SimulationResult run_simulation(const RunConfig& cfg) {
  cfg.validate();
  SimulationResult result;
  result.config = cfg;

  const double rate = cfg.scenario.rate;
  const double dt = 1.0 / rate;
  const bool fistbump = cfg.scenario.kind == sim::MotionKind::kFistbump;
  const auto motion = sim::gen_motion(cfg.scenario);
  const int users = cfg.users;
  const std::size_t n = cfg.scenario.sample_count();

  // Per-user truth, device tracks and mocap observations.
  std::vector<sim::UserMotion> truth;
  std::vector<DeviceTracks> device;
  std::vector<Trajectory> observed;  // engine frame, capture stamps
  std::vector<Calibration> calibration;
  for (int u = 0; u < users; ++u) {
    sim::UserMotion m = fistbump ? motion.users[u] : motion.users.front();
    if (!fistbump) m.head = rotate_about_up(m.head, 2.0 * std::numbers::pi * u / users);
    truth.push_back(m);
    device.push_back(track_device(m, user_drift(cfg, u, kDriftSalt)));
    const auto obs = sim::mocap_observe(m.head, inverse(cfg.extrinsics), user_mocap(cfg, u, kMocapSalt));
    observed.push_back(to_engine(obs.available));
    calibration.push_back(pre_calibrate(cfg, u));
  }

  // Packet k leaves the server at frame k and reaches the clients at
  // delivery[k] >= k + latency. Order is preserved.
  std::vector<std::vector<std::size_t>> arrivals(n);
  {
    std::mt19937_64 rng(derive_seed(cfg.seed, cfg.mocap.seed, 0, kPacketSalt));
    std::uniform_int_distribution<int> jitter(0, cfg.mocap.jitter_frames);
    std::size_t last = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const int delay = cfg.mocap.latency_frames + (cfg.mocap.jitter_frames > 0 ? jitter(rng) : 0);
      const std::size_t at = std::max(last, k + static_cast<std::size_t>(delay));
      last = at;
      if (at < n) arrivals[at].push_back(k);
    }
  }

  std::vector<std::vector<std::uint8_t>> packets(n);
  for (std::size_t k = 0; k < n; ++k) {
    net::RigidBodyPacket p;
    p.frame_number = static_cast<std::uint32_t>(k);
    p.timestamp_us = static_cast<std::uint64_t>(std::llround(truth.front().head[k].t * 1e6));
    for (int u = 0; u < users; ++u) {
      const auto id = static_cast<std::uint16_t>(u + 1);
      p.bodies.push_back(static_cast<int>(k) < cfg.placeholder_frames ? net::placeholder_body(id)
                                                                        : net::make_body(id, observed[u][k].pose));
    }
    packets[k] = net::encode_packet(p);
    result.mocap_capture.insert(result.mocap_capture.end(), packets[k].begin(), packets[k].end());
  }

  net::PoseHub hub;
  std::vector<ClientState> clients(users);
  result.users.resize(users);
  for (int u = 0; u < users; ++u) {
    const auto id = static_cast<std::uint16_t>(u + 1);
    clients[u].session.tracked_body = id;
    hub.register_user(id);
    const auto reg = net::encode_register(id);
    result.hub_capture.insert(result.hub_capture.end(), reg.begin(), reg.end());

    UserRun& run = result.users[u];
    run.user = u + 1;
    run.gt = truth[u].head;
    run.cam_local = device[u].head;
    run.extrinsics = calibration[u].extrinsics;
    run.calibration_latency = calibration[u].latency;
    for (Trajectory* t : {&run.est, &run.uncorrected, &run.mocap, &run.eye_mocap}) t->nominal_rate_hz = rate;
    if (fistbump) {
      run.right_gt = *truth[u].right_hand;
      run.right_est = Trajectory{rate, {}};
      run.right_peer = Trajectory{rate, {}};
    }
  }

  std::vector<std::vector<Vec3>> right_est_at(users, std::vector<Vec3>(n, nan_vec()));
  std::vector<std::vector<Vec3>> right_peer_at(users, std::vector<Vec3>(n, nan_vec()));

  for (std::size_t k = 0; k < n; ++k) {
    const double t = truth.front().head[k].t;

    for (int u = 0; u < users; ++u) {
      ClientState& c = clients[u];
      UserRun& run = result.users[u];
      const auto id = static_cast<std::uint16_t>(u + 1);
      const int lag = cfg.latency_compensation ? run.calibration_latency.lag_frames : 0;

      bool fresh = false;
      Pose received;
      for (std::size_t j : arrivals[k]) c.decoder.feed(packets[j]);
      while (auto packet = c.decoder.next()) {
        c.session = net::session_step(c.session, *packet);
        const auto it = c.session.bodies.find(id);
        if (c.session.phase == net::SessionPhase::kTracking && it != c.session.bodies.end() && it->second.updated) {
          fresh = true;
          received = it->second.pose;
        }
      }
      // Several packets can land in one frame; only the newest is used.
      if (fresh) {
        c.eye_w = align::eye_world(received, run.extrinsics);
        run.mocap.samples.push_back({t, convert_handedness(received)});
        run.eye_mocap.samples.push_back({t, c.eye_w});
        c.cam_ref_index = static_cast<std::size_t>(std::max<long long>(0, static_cast<long long>(k) - lag));
      }

      const Pose& cam_ref = device[u].head[c.cam_ref_index].pose;
      if (fresh && !c.aligned) {
        const Pose origin = cfg.leveled ? align::solve_origin_leveled(c.eye_w, cam_ref)
                                        : align::solve_origin_full(c.eye_w, cam_ref);
        c.alignment.origin = origin;
        c.alignment.correction_start = origin;
        c.alignment.last_residual = align::drift_residual(compose(origin, cam_ref), c.eye_w);
        c.initial_origin = origin;
        c.aligned = true;
        run.first_aligned_frame = k;
        result.events.push_back({k, t, u + 1, "initial_alignment", c.alignment.last_residual});
      } else if (c.aligned && cfg.correction_enabled) {
        const align::Residual residual = align::drift_residual(compose(c.alignment.origin, cam_ref), c.eye_w);
        const Pose target = cfg.leveled ? align::solve_origin_leveled(c.eye_w, cam_ref)
                                        : align::solve_origin_full(c.eye_w, cam_ref);
        const align::Phase before = c.alignment.phase;
        c.alignment = align::correction_step(c.alignment, residual, target, cfg.correction, dt);
        if (before == align::Phase::kMonitoring && c.alignment.phase == align::Phase::kCorrecting) {
          ++run.corrections;
          result.events.push_back({k, t, u + 1, "correction_start", residual});
        } else if (before == align::Phase::kCorrecting && c.alignment.phase == align::Phase::kMonitoring) {
          result.events.push_back({k, t, u + 1, "correction_end", residual});
        }
      }

      if (!c.aligned) continue;
      const Pose& origin = c.alignment.origin;
      run.est.samples.push_back({t, compose(origin, device[u].head[k].pose)});
      run.uncorrected.samples.push_back({t, compose(c.initial_origin, device[u].head[k].pose)});

      net::SharedPoseMessage msg;
      msg.user_id = id;
      msg.frame_number = static_cast<std::uint32_t>(k);
      msg.head = run.est.samples.back().pose;
      msg.left_hand = device[u].left ? compose(origin, (*device[u].left)[k].pose) : msg.head;
      msg.right_hand = device[u].right ? compose(origin, (*device[u].right)[k].pose) : msg.head;
      if (fistbump) {
        run.right_est->samples.push_back({t, msg.right_hand});
        right_est_at[u][k] = msg.right_hand.translation;
      }
      hub.publish(msg);
      const auto bytes = net::encode_shared_pose(msg);
      result.hub_capture.insert(result.hub_capture.end(), bytes.begin(), bytes.end());
    }

    if (!fistbump) continue;
    for (int u = 0; u < users; ++u) {
      for (const auto& peer : hub.poll(static_cast<std::uint16_t>(u + 1))) {
        result.users[u].right_peer->samples.push_back({t, peer.right_hand});
        right_peer_at[u][k] = peer.right_hand.translation;
      }
    }
  }

  // Contacts.
  for (std::size_t e = 0; e < motion.contacts.size() && fistbump; ++e) {
    const auto& ev = motion.contacts[e];
    ContactResult cr{e + 1, ev.frame, ev.t, ev.point, {}, {}};
    for (int u = 0; u < users; ++u) {
      cr.user_errors.push_back((right_est_at[u][ev.frame] - ev.point).norm());
      cr.peer_errors.push_back((right_peer_at[u][ev.frame] - ev.point).norm());
    }
    result.contacts.push_back(std::move(cr));
  }

  // Metrics.
  eval::MetricsReport& report = result.report;
  report.scenario = cfg.name.empty() ? std::string(sim::to_string(cfg.scenario.kind)) : cfg.name;
  report.seed = cfg.seed;
  report.config = to_json(cfg);
  const double max_dt = 0.5 / rate;
  double sum_sq = 0.0, sum_sq_uncorrected = 0.0, sum_sq_mocap = 0.0, sum_sq_comp = 0.0;
  std::size_t count = 0, count_uncorrected = 0, count_mocap = 0, count_comp = 0;
  nlohmann::json user_json = nlohmann::json::array();
  for (const auto& run : result.users) {
    const std::string name = "user" + std::to_string(run.user);
    eval::TrajectoryMetrics head{name + "_head", eval::ate(run.est, run.gt, max_dt), {}, {}};
    head.ate_aligned = eval::ate_rmse_aligned(run.est, run.gt, max_dt);
    const auto vs_mocap = eval::ate(run.est, run.eye_mocap, max_dt);
    const auto vs_mocap_comp =
        eval::ate(run.est, shift_times(run.eye_mocap, run.calibration_latency.latency), max_dt);
    head.ate_latency_compensated = vs_mocap_comp.rmse;
    const auto uncorrected = eval::ate(run.uncorrected, run.gt, max_dt);
    sum_sq += head.ate.sum_squared, count += head.ate.sample_count;
    sum_sq_uncorrected += uncorrected.sum_squared, count_uncorrected += uncorrected.sample_count;
    sum_sq_mocap += vs_mocap.sum_squared, count_mocap += vs_mocap.sample_count;
    sum_sq_comp += vs_mocap_comp.sum_squared, count_comp += vs_mocap_comp.sample_count;

    const Pose& x = run.extrinsics.transform;
    const double x_angle = geodesic_angle(x.rotation, cfg.extrinsics.rotation);
    user_json.push_back(
        {{"user", run.user},
         {"ate_rmse_m", head.ate.rmse},
         {"ate_rmse_uncorrected_m", uncorrected.rmse},
         {"ate_rmse_vs_mocap_m", vs_mocap.rmse},
         {"ate_rmse_vs_mocap_latency_compensated_m", vs_mocap_comp.rmse},
         {"corrections", run.corrections},
         {"first_aligned_frame", run.first_aligned_frame},
         {"extrinsics",
          {{"pose", pose_to_json(x)},
           {"rms_position_residual_m", run.extrinsics.rms_position_residual},
           {"rms_rotation_residual_rad", run.extrinsics.rms_rotation_residual},
           {"translation_error_m", (x.translation - cfg.extrinsics.translation).norm()},
           {"rotation_error_deg", x_angle * 180.0 / std::numbers::pi}}},
         {"calibration_latency_frames", run.calibration_latency.lag_frames},
         {"calibration_latency_s", run.calibration_latency.latency}});
    report.entries.push_back(std::move(head));
    if (run.right_est) {
      eval::TrajectoryMetrics right{name + "_right", eval::ate(*run.right_est, *run.right_gt, max_dt), {}, {}};
      sum_sq += right.ate.sum_squared, count += right.ate.sample_count;
      report.entries.push_back(std::move(right));
    }
  }
  report.ate_rmse = count ? std::sqrt(sum_sq / static_cast<double>(count)) : 0.0;
  report.sample_count = count;
  report.ate_rmse_latency_compensated = count_comp ? std::sqrt(sum_sq_comp / static_cast<double>(count_comp)) : 0.0;
  try {
    report.latency = eval::estimate_latency(result.users.front().cam_local, result.users.front().eye_mocap, rate,
                                            cfg.max_lag_frames);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kUndefinedCorrelation) throw;
  }
  report.extra["users"] = user_json;
  report.extra["ate_rmse_uncorrected_m"] =
      count_uncorrected ? std::sqrt(sum_sq_uncorrected / static_cast<double>(count_uncorrected)) : 0.0;
  report.extra["ate_rmse_vs_mocap_m"] = count_mocap ? std::sqrt(sum_sq_mocap / static_cast<double>(count_mocap)) : 0.0;
  std::size_t n_corrections = 0;
  for (const auto& ev : result.events) n_corrections += ev.kind == "correction_start";
  report.extra["correction_count"] = n_corrections;
  report.extra["event_count"] = result.events.size();
  nlohmann::json contacts = nlohmann::json::array();
  for (const auto& c : result.contacts) {
    report.contacts.push_back({c.t, c.point});
    contacts.push_back({{"event", c.event}, {"frame", c.frame}, {"t", c.t},
                        {"user_errors_m", c.user_errors}, {"peer_errors_m", c.peer_errors}});
  }
  report.extra["contacts"] = contacts;
  report.extra["mocap_capture_bytes"] = result.mocap_capture.size();
  report.extra["hub_capture_bytes"] = result.hub_capture.size();
  return result;
}

std::vector<fs::path> write_simulation(const SimulationResult& result, const fs::path& dir) {
  std::vector<eval::PlotSeries> series;
  for (const auto& run : result.users) {
    const std::string name = "user" + std::to_string(run.user);
    series.push_back({name + "_head", "est", run.est});
    series.push_back({name + "_head", "ref", run.gt});
    if (run.right_est) {
      series.push_back({name + "_right", "est", *run.right_est});
      series.push_back({name + "_right", "ref", *run.right_gt});
    }
  }
  std::vector<fs::path> written = eval::export_report(result.report, series, dir);
  const std::string base = result.report.scenario + "_" + std::to_string(result.report.seed);
  auto path = [&](const std::string& suffix) { return dir / (base + "_" + suffix); };

  for (const auto& run : result.users) {
    const std::string name = "user" + std::to_string(run.user);
    const std::pair<const char*, const Trajectory*> extra[] = {
        {"_cam_local.csv", &run.cam_local},
        {"_uncorrected.csv", &run.uncorrected},
        {"_mocap.csv", &run.mocap},
        {"_eye_mocap.csv", &run.eye_mocap},
    };
    for (const auto& [suffix, traj] : extra) {
      written.push_back(path(name + suffix));
      write_trajectory_csv(written.back(), *traj);
    }
    if (run.right_peer) {
      written.push_back(path(name + "_right_peer.csv"));
      write_trajectory_csv(written.back(), *run.right_peer);
    }
  }

  char line[256];
  std::string events = "frame,t,user,event,position_error,yaw_error_deg\n";
  for (const auto& e : result.events) {
    std::snprintf(line, sizeof(line), "%zu,%.17g,%d,%s,%.17g,%.17g\n", e.frame, e.t, e.user, e.kind.c_str(),
                  e.residual.position_error, e.residual.yaw_error * 180.0 / std::numbers::pi);
    events += line;
  }
  written.push_back(path("events.csv"));
  write_text(written.back(), events);

  if (!result.contacts.empty()) {
    std::string contacts = "event,frame,t,px,py,pz,user,right_error,peer_error\n";
    for (const auto& c : result.contacts) {
      for (std::size_t u = 0; u < c.user_errors.size(); ++u) {
        std::snprintf(line, sizeof(line), "%zu,%zu,%.17g,%.17g,%.17g,%.17g,%zu,%.17g,%.17g\n", c.event, c.frame, c.t,
                      c.point.x(), c.point.y(), c.point.z(), u + 1, c.user_errors[u], c.peer_errors[u]);
        contacts += line;
      }
    }
    written.push_back(path("contacts.csv"));
    write_text(written.back(), contacts);
  }

  written.push_back(path("mocap.bin"));
  write_bytes(written.back(), result.mocap_capture);
  written.push_back(path("hub.bin"));
  write_bytes(written.back(), result.hub_capture);
  written.push_back(path("config.json"));
  write_text(written.back(), to_json(result.config).dump(2) + "\n");
  return written;
}

std::vector<double> block_errors(const Trajectory& est, const Trajectory& ref, double block_seconds) {
  if (!(block_seconds > 0.0)) throw Error(ErrorCode::kInvalidArgument, "block length must be > 0");
  const auto res = eval::ate(est, ref, 0.5 / est.nominal_rate_hz);
  std::vector<double> sums;
  std::vector<std::size_t> counts;
  if (res.series.empty()) return {};
  const double t0 = res.series.front().t;
  for (const auto& e : res.series) {
    const auto b = static_cast<std::size_t>(std::floor((e.t - t0) / block_seconds + 1e-9));
    if (b >= sums.size()) sums.resize(b + 1, 0.0), counts.resize(b + 1, 0);
    sums[b] += e.error.norm();
    ++counts[b];
  }
  // Keep whole blocks only.
  const auto full = static_cast<std::size_t>(std::llround(block_seconds * est.nominal_rate_hz));
  std::vector<double> out;
  for (std::size_t b = 0; b < sums.size(); ++b) {
    if (counts[b] + 1 >= full) out.push_back(sums[b] / static_cast<double>(counts[b]));
  }
  return out;
}

}  // namespace coloc::pipeline
