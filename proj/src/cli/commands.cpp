#include "coloc/cli.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "coloc/calib.hpp"
#include "coloc/config.hpp"
#include "coloc/error.hpp"
#include "coloc/eval.hpp"
#include "coloc/net/packet.hpp"
#include "coloc/net/transport.hpp"
#include "coloc/pipeline.hpp"
#include "coloc/trajectory.hpp"

namespace coloc::cli {

namespace fs = std::filesystem;

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop.store(true); }

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open for writing: " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

Trajectory convert_trajectory(Trajectory traj) {
  for (auto& s : traj.samples) s.pose = convert_handedness(s.pose);
  return traj;
}

Trajectory shifted(Trajectory traj, double dt) {
  for (auto& s : traj.samples) s.t -= dt;
  return traj;
}

std::pair<std::string, std::uint16_t> split_host_port(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos) throw Error(ErrorCode::kInvalidArgument, "expected host:port, got " + text);
  const int port = std::stoi(text.substr(colon + 1));
  if (port < 1 || port > 65535) throw Error(ErrorCode::kInvalidArgument, "port out of range: " + text);
  return {text.substr(0, colon), static_cast<std::uint16_t>(port)};
}

// --- calibrate ---------------------------------------------------------------

struct CalibrateArgs {
  std::string mocap, eye, config, out = "extrinsics.json";
  bool prealign = false;
  bool convert_mocap = false;
  bool estimate_latency = false;
  double latency = 0.0;
  double rate = 100.0;
  int min_pairs = -1;
  double max_dt = -1.0;
};

int cmd_calibrate(const CalibrateArgs& a, std::ostream& out) {
  calib::TrajectoryCalibConfig tc;
  if (!a.config.empty()) {
    const RunConfig cfg = load_run_config(a.config);
    tc.calib.min_pairs = cfg.calibration.min_pairs;
    tc.calib.max_dt = cfg.calibration.max_dt;
  }
  if (a.min_pairs >= 0) tc.calib.min_pairs = static_cast<std::size_t>(a.min_pairs);
  if (a.max_dt >= 0.0) tc.calib.max_dt = a.max_dt;
  tc.prealign = a.prealign;

  Trajectory mocap = read_trajectory_csv(fs::path(a.mocap), a.rate);
  const Trajectory eye = read_trajectory_csv(fs::path(a.eye), a.rate);
  if (a.convert_mocap) mocap = convert_trajectory(std::move(mocap));

  tc.mocap_delay = a.latency;
  std::optional<eval::LatencyEstimate> lat;
  if (a.estimate_latency) {
    lat = eval::estimate_latency(eye, mocap, a.rate);
    tc.mocap_delay = lat->latency;
  }
  const auto result = calib::calibrate(mocap, eye, tc);
  nlohmann::json j;
  j["extrinsics"] = pose_to_json(result.extrinsics.transform);
  j["rms_position_residual_m"] = result.extrinsics.rms_position_residual;
  j["rms_rotation_residual_rad"] = result.extrinsics.rms_rotation_residual;
  j["sample_count"] = result.extrinsics.sample_count;
  j["pair_count"] = result.pair_count;
  j["iterations"] = result.iterations;
  j["eye_frame_to_world"] = pose_to_json(result.eye_frame_to_world);
  j["mocap_delay_s"] = tc.mocap_delay;
  if (lat) j["latency_frames"] = lat->lag_frames;
  write_json(a.out, j);
  char line[256];
  std::snprintf(line, sizeof(line), "extrinsics: %zu pairs, rms position %.6g m, rms rotation %.6g rad -> %s\n",
                result.pair_count, result.extrinsics.rms_position_residual,
                result.extrinsics.rms_rotation_residual, a.out.c_str());
  out << line;
  return 0;
}

// --- simulate ----------------------------------------------------------------

struct SimulateArgs {
  std::string config, out, scenario;
  std::optional<std::uint64_t> seed;
  std::optional<int> users;
  std::optional<double> duration;
  bool no_correction = false;
};

RunConfig simulate_config(const SimulateArgs& a) {
  RunConfig cfg = a.config.empty() ? RunConfig() : load_run_config(a.config);
  if (!a.scenario.empty()) {
    cfg.scenario.kind = sim::motion_kind_from_string(a.scenario);
    if (cfg.scenario.kind == sim::MotionKind::kFistbump && !a.users) cfg.users = 2;
  }
  if (a.seed) cfg.seed = *a.seed;
  if (a.users) cfg.users = *a.users;
  if (a.duration) cfg.scenario.duration = *a.duration;
  if (a.no_correction) cfg.correction_enabled = false;
  if (!a.out.empty()) cfg.output_dir = a.out;
  cfg.validate();
  return cfg;
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  const RunConfig cfg = simulate_config(a);
  const auto result = pipeline::run_simulation(cfg);
  const auto files = pipeline::write_simulation(result, cfg.output_dir);
  char line[256];
  std::snprintf(line, sizeof(line), "%s: ATE %.6f m over %zu samples, %zu corrections, %zu files in %s\n",
                cfg.prefix().c_str(), result.report.ate_rmse, result.report.sample_count,
                static_cast<std::size_t>(result.report.extra["correction_count"].get<std::size_t>()), files.size(),
                cfg.output_dir.c_str());
  out << line;
  return 0;
}

// --- serve -------------------------------------------------------------------

struct ServeArgs {
  std::string capture, config, bind = "0.0.0.0";
  int mocap_port = -1, hub_port = -1;
  double rate = 100.0;
  double duration = 0.0;
};

int cmd_serve(const ServeArgs& a, std::ostream& out) {
  std::shared_ptr<const std::vector<std::uint8_t>> capture;
  if (!a.capture.empty()) {
    capture = std::make_shared<const std::vector<std::uint8_t>>(read_file(a.capture));
  } else {
    const RunConfig cfg = a.config.empty() ? RunConfig() : load_run_config(a.config);
    capture = std::make_shared<const std::vector<std::uint8_t>>(pipeline::run_simulation(cfg).mocap_capture);
  }
  if (!(a.rate >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "--rate must be >= 0");
  const auto period = a.rate > 0.0 ? std::chrono::microseconds(std::llround(1e6 / a.rate)) : std::chrono::microseconds(0);
  const auto mocap_port = resolve_port("COLOC_MOCAP_PORT", a.mocap_port, net::kDefaultMocapPort);
  const auto hub_port = resolve_port("COLOC_HUB_PORT", a.hub_port, net::kDefaultHubPort);

  net::MocapStreamServer mocap(a.bind, mocap_port, capture, period);
  net::HubServer hub(a.bind, hub_port);
  g_stop.store(false);
  auto old_int = std::signal(SIGINT, on_signal);
  auto old_term = std::signal(SIGTERM, on_signal);
  mocap.start();
  hub.start();
  out << "mocap listening on " << a.bind << ':' << mocap.port() << '\n'
      << "hub listening on " << a.bind << ':' << hub.port() << '\n'
      << std::flush;

  const auto start = std::chrono::steady_clock::now();
  while (!g_stop.load()) {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    if (a.duration > 0.0 &&
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() >= a.duration) {
      break;
    }
  }
  mocap.stop();
  hub.stop();
  std::signal(SIGINT, old_int);
  std::signal(SIGTERM, old_term);
  out << "served " << mocap.clients_served() << " mocap client(s)\n";
  return 0;
}

// --- evaluate ----------------------------------------------------------------

struct EvaluateArgs {
  std::vector<std::string> est, ref;
  std::string latency_ref, run_dir, scenario, out = "eval";
  std::uint64_t seed = 0;
  bool aligned = false;
  double rate = 100.0;
  double max_dt = -1.0;
  int max_lag = 30;
};

int cmd_evaluate(EvaluateArgs a, std::ostream& out) {
  std::vector<std::string> names;
  std::vector<std::string> latency_refs;
  if (!a.run_dir.empty()) {
    if (a.scenario.empty()) throw Error(ErrorCode::kInvalidArgument, "--run-dir needs --scenario");
    const std::string base = a.scenario + "_" + std::to_string(a.seed);
    for (int u = 1;; ++u) {
      const std::string user = "user" + std::to_string(u);
      const fs::path est = fs::path(a.run_dir) / (base + "_" + user + "_head_est.csv");
      if (!fs::exists(est)) break;
      a.est.push_back(est.string());
      a.ref.push_back((fs::path(a.run_dir) / (base + "_" + user + "_head_ref.csv")).string());
      latency_refs.push_back((fs::path(a.run_dir) / (base + "_" + user + "_eye_mocap.csv")).string());
      names.push_back(user + "_head");
    }
    if (a.est.empty()) throw Error(ErrorCode::kIo, "no '" + base + "_user*_head_est.csv' in " + a.run_dir);
  } else {
    if (a.est.empty() || a.est.size() != a.ref.size()) {
      throw Error(ErrorCode::kInvalidArgument, "give matching --est/--ref pairs or --run-dir");
    }
    for (std::size_t i = 0; i < a.est.size(); ++i) {
      names.push_back(fs::path(a.est[i]).stem().string());
      latency_refs.push_back(a.latency_ref.empty() ? a.ref[i] : a.latency_ref);
    }
  }
  const double max_dt = a.max_dt > 0.0 ? a.max_dt : 0.5 / a.rate;

  eval::MetricsReport report;
  report.scenario = a.scenario.empty() ? "eval" : a.scenario;
  report.seed = a.seed;
  std::vector<eval::PlotSeries> series;
  double sum_sq = 0.0, sum_sq_comp = 0.0;
  std::size_t count = 0, count_comp = 0;
  for (std::size_t i = 0; i < a.est.size(); ++i) {
    const Trajectory est = read_trajectory_csv(fs::path(a.est[i]), a.rate);
    const Trajectory ref = read_trajectory_csv(fs::path(a.ref[i]), a.rate);
    const Trajectory lat_ref = read_trajectory_csv(fs::path(latency_refs[i]), a.rate);
    eval::TrajectoryMetrics m{names[i], eval::ate(est, ref, max_dt), {}, {}};
    if (a.aligned) m.ate_aligned = eval::ate_rmse_aligned(est, ref, max_dt);
    const auto lat = eval::estimate_latency(est, lat_ref, a.rate, a.max_lag);
    const auto comp = eval::ate(est, shifted(lat_ref, lat.latency), max_dt);
    m.ate_latency_compensated = comp.rmse;
    if (i == 0) report.latency = lat;
    sum_sq += m.ate.sum_squared, count += m.ate.sample_count;
    sum_sq_comp += comp.sum_squared, count_comp += comp.sample_count;
    series.push_back({names[i], "est", est});
    series.push_back({names[i], "ref", ref});
    report.entries.push_back(std::move(m));
  }
  report.ate_rmse = std::sqrt(sum_sq / static_cast<double>(count));
  report.sample_count = count;
  report.ate_rmse_latency_compensated = std::sqrt(sum_sq_comp / static_cast<double>(count_comp));
  report.config = {{"est", a.est}, {"ref", a.ref}, {"latency_ref", latency_refs}, {"rate", a.rate},
                   {"max_dt", max_dt}, {"max_lag_frames", a.max_lag}, {"aligned", a.aligned}};
  const auto files = eval::export_report(report, series, a.out);
  char line[256];
  std::snprintf(line, sizeof(line), "ATE %.6f m (%zu samples), latency %d frames = %.3f s, compensated ATE %.6f m\n",
                report.ate_rmse, report.sample_count, report.latency->lag_frames, report.latency->latency,
                *report.ate_rmse_latency_compensated);
  out << line << "report: " << files.front().string() << '\n';
  return 0;
}

// --- replay ------------------------------------------------------------------

struct ReplayArgs {
  std::string capture, connect, out;
  int timeout_ms = 5000;
};

const char* status_name(net::BodyStatus s) {
  switch (s) {
    case net::BodyStatus::kValid: return "valid";
    case net::BodyStatus::kPlaceholder: return "placeholder";
    case net::BodyStatus::kCorrupt: return "corrupt";
  }
  return "?";
}

int cmd_replay(const ReplayArgs& a, std::ostream& out) {
  std::vector<net::RigidBodyPacket> packets;
  if (!a.capture.empty() == !a.connect.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "give exactly one of --capture or --connect");
  }
  if (!a.capture.empty()) {
    packets = net::decode_capture(read_file(a.capture));
  } else {
    const auto [host, port] = split_host_port(a.connect);
    packets = net::receive_stream(host, port, a.timeout_ms);
  }
  std::ofstream file;
  if (!a.out.empty()) {
    file.open(a.out, std::ios::binary);
    if (!file) throw Error(ErrorCode::kIo, "cannot open for writing: " + a.out);
  }
  std::ostream& dst = a.out.empty() ? out : file;
  dst << "frame,timestamp_us,body_id,status,px_mm,py_mm,pz_mm,qw,qx,qy,qz\n";
  char line[320];
  for (const auto& p : packets) {
    for (const auto& b : p.bodies) {
      std::snprintf(line, sizeof(line), "%u,%llu,%u,%s,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", p.frame_number,
                    static_cast<unsigned long long>(p.timestamp_us), b.body_id, status_name(net::body_status(b)),
                    b.position_mm[0], b.position_mm[1], b.position_mm[2], b.rotation[0], b.rotation[1],
                    b.rotation[2], b.rotation[3]);
      dst << line;
    }
  }
  if (!a.out.empty()) out << packets.size() << " packets -> " << a.out << '\n';
  return 0;
}

}  // namespace

unsigned short resolve_port(const char* env_name, int flag_value, unsigned short fallback) {
  long value = fallback;
  if (flag_value >= 0) {
    value = flag_value;
  } else if (const char* env = std::getenv(env_name); env && *env) {
    char* end = nullptr;
    value = std::strtol(env, &end, 10);
    if (*end != '\0') throw Error(ErrorCode::kInvalidArgument, std::string(env_name) + " is not a port number");
  }
  if (value < 0 || value > 65535) throw Error(ErrorCode::kInvalidArgument, "port out of range");
  return static_cast<unsigned short>(value);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Co-located tracking toolkit: calibration, simulation, streaming and evaluation"};
  app.require_subcommand(1);

  CalibrateArgs ca;
  auto* calibrate = app.add_subcommand("calibrate", "Estimate mocap-to-eye extrinsics from two trajectory CSVs");
  calibrate->add_option("--mocap", ca.mocap, "Mocap body trajectory CSV")->required();
  calibrate->add_option("--eye", ca.eye, "Eye-center trajectory CSV")->required();
  calibrate->add_option("--config", ca.config, "Run config (calibration.min_pairs / max_dt)");
  calibrate->add_option("--out", ca.out, "Extrinsics JSON output path");
  calibrate->add_flag("--prealign", ca.prealign, "Register the eye trajectory onto the mocap frame first");
  calibrate->add_flag("--convert-mocap", ca.convert_mocap, "Mocap CSV is right-handed Z-up");
  calibrate->add_option("--latency", ca.latency, "Mocap transport delay to remove (s)");
  calibrate->add_flag("--estimate-latency", ca.estimate_latency, "Estimate the mocap delay by correlation");
  calibrate->add_option("--rate", ca.rate, "Nominal sample rate (Hz)");
  calibrate->add_option("--min-pairs", ca.min_pairs, "Minimum associated pairs");
  calibrate->add_option("--max-dt", ca.max_dt, "Association window (s)");

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Run a full simulated session and write all artifacts");
  simulate->add_option("--config", sa.config, "Run config JSON");
  simulate->add_option("--out", sa.out, "Output directory (overrides output_dir)");
  simulate->add_option("--seed", sa.seed, "Run seed (overrides seed)");
  simulate->add_option("--scenario", sa.scenario, "line | circle | patrol | fistbump");
  simulate->add_option("--users", sa.users, "Number of users");
  simulate->add_option("--duration", sa.duration, "Scenario duration (s)");
  simulate->add_flag("--no-correction", sa.no_correction, "Disable drift correction");

  ServeArgs va;
  auto* serve = app.add_subcommand("serve", "Serve a mocap stream and the pose hub over TCP");
  serve->add_option("--capture", va.capture, "Replay this mocap capture file");
  serve->add_option("--config", va.config, "Simulate this config and serve its stream");
  serve->add_option("--bind", va.bind, "Bind address");
  serve->add_option("--mocap-port", va.mocap_port, "Mocap port (env COLOC_MOCAP_PORT, default 22222)");
  serve->add_option("--hub-port", va.hub_port, "Hub port (env COLOC_HUB_PORT, default 22333)");
  serve->add_option("--rate", va.rate, "Frames per second, 0 = unthrottled");
  serve->add_option("--duration", va.duration, "Stop after this many seconds (0 = until SIGINT/SIGTERM)");

  EvaluateArgs ea;
  auto* evaluate = app.add_subcommand("evaluate", "ATE, latency and plots for estimated vs reference trajectories");
  evaluate->add_option("--est", ea.est, "Estimated trajectory CSV (repeatable)");
  evaluate->add_option("--ref", ea.ref, "Reference trajectory CSV (repeatable, paired with --est)");
  evaluate->add_option("--latency-ref", ea.latency_ref, "Delayed reference for the latency estimate");
  evaluate->add_option("--run-dir", ea.run_dir, "Directory written by simulate");
  evaluate->add_option("--scenario", ea.scenario, "Run name (file prefix) for --run-dir and report naming");
  evaluate->add_option("--seed", ea.seed, "Run seed for --run-dir and report naming");
  evaluate->add_option("--out", ea.out, "Output directory");
  evaluate->add_flag("--aligned", ea.aligned, "Also report rigidly aligned ATE");
  evaluate->add_option("--rate", ea.rate, "Common resampling rate (Hz)");
  evaluate->add_option("--max-dt", ea.max_dt, "Association window (s), default half a frame");
  evaluate->add_option("--max-lag", ea.max_lag, "Largest lag searched (frames)");

  ReplayArgs ra;
  auto* replay = app.add_subcommand("replay", "Decode a capture file or a live stream to CSV");
  replay->add_option("--capture", ra.capture, "Capture file");
  replay->add_option("--connect", ra.connect, "host:port of a mocap stream");
  replay->add_option("--out", ra.out, "CSV output (default stdout)");
  replay->add_option("--timeout-ms", ra.timeout_ms, "Idle timeout for --connect");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorCode::kInvalidArgument);
  }

  try {
    if (*calibrate) return cmd_calibrate(ca, out);
    if (*simulate) return cmd_simulate(sa, out);
    if (*serve) return cmd_serve(va, out);
    if (*evaluate) return cmd_evaluate(ea, out);
    if (*replay) return cmd_replay(ra, out);
  } catch (const Error& e) {
    err << "error (" << to_string(e.code()) << "): " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace coloc::cli
