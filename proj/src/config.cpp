#include "coloc/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include "coloc/error.hpp"

namespace coloc {

namespace {

using nlohmann::json;

constexpr double kDeg = std::numbers::pi / 180.0;

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  throw Error(ErrorCode::kInvalidArgument, "config: '" + key + "' " + what);
}

// Reads fields out of one JSON object and rejects keys nobody asked for.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) bad(path_.empty() ? "<root>" : path_, "must be an object");
  }

  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) bad(qualify(key), "is not a known setting");
    }
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!it->is_number()) bad(qualify(key), "must be a number");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) bad(qualify(key), "must be true or false");
      } else if constexpr (std::is_integral_v<T>) {
        if (!it->is_number_integer()) bad(qualify(key), "must be an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (it->is_number_integer() && it->template get<long long>() < 0) bad(qualify(key), "must be >= 0");
        }
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!it->is_string()) bad(qualify(key), "must be a string");
      }
      out = it->template get<T>();
    } catch (const json::exception& e) {
      bad(qualify(key), e.what());
    }
  }

  void read_deg(const std::string& key, double& radians) {
    double deg = radians / kDeg;
    read(key, deg);
    radians = deg * kDeg;
  }

  const json* child(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string qualify(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Vec3 vec3_from_json(const json& j, const std::string& key) {
  if (!j.is_array() || j.size() != 3) bad(key, "must be an array of 3 numbers");
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) bad(key, "must be an array of 3 numbers");
    v[i] = j[i].get<double>();
  }
  return v;
}

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

}  // namespace

json pose_to_json(const Pose& p) {
  const Quat& q = p.rotation;
  return {{"translation", vec3_json(p.translation)}, {"rotation_wxyz", {q.w(), q.x(), q.y(), q.z()}}};
}

Pose pose_from_json(const json& j, const std::string& key) {
  Section s(j, key);
  Pose p;
  if (const json* t = s.child("translation")) p.translation = vec3_from_json(*t, s.qualify("translation"));
  if (const json* r = s.child("rotation_wxyz")) {
    if (!r->is_array() || r->size() != 4) bad(s.qualify("rotation_wxyz"), "must be 4 numbers");
    double q[4];
    for (int i = 0; i < 4; ++i) {
      if (!(*r)[i].is_number()) bad(s.qualify("rotation_wxyz"), "must be 4 numbers");
      q[i] = (*r)[i].get<double>();
    }
    p.rotation = Quat(q[0], q[1], q[2], q[3]);
    if (std::abs(p.rotation.norm() - 1.0) > 1e-6) bad(s.qualify("rotation_wxyz"), "must be a unit quaternion");
    p.rotation.normalize();
  }
  if (const json* r = s.child("yaw_deg")) {
    if (!r->is_number()) bad(s.qualify("yaw_deg"), "must be a number");
    p.rotation = (yaw_rotation(r->get<double>() * kDeg) * p.rotation).normalized();
  }
  return p;
}

RunConfig::RunConfig() {
  drift.mode = sim::DriftMode::kRandomWalk;
  drift.position_drift_rate = 0.001;
  drift.yaw_drift_rate = 3e-4;
  drift.white_noise_pos = 2e-4;
  drift.device_frame_offset = {yaw_rotation(30.0 * kDeg), Vec3(0.4, 0.0, -0.8)};
  drift.seed = 11;
  mocap.noise_rot = 0.1 * kDeg;
  mocap.seed = 13;
  extrinsics = {axis_angle(Vec3::UnitX(), 15.0 * kDeg), Vec3(0.02, 0.08, 0.10)};
}

std::string RunConfig::prefix() const {
  return (name.empty() ? std::string(sim::to_string(scenario.kind)) : name) + "_" + std::to_string(seed);
}

void RunConfig::validate() const {
  scenario.validate();
  drift.validate();
  mocap.validate();
  correction.validate();
  if (users < 1) bad("users", "must be >= 1");
  if (scenario.kind == sim::MotionKind::kFistbump && users != 2) bad("users", "must be 2 for fistbump");
  if (std::abs(mocap.rate - scenario.rate) > 1e-9) bad("mocap.rate", "must equal scenario.rate in simulation");
  if (!(calibration.seconds > 0.0)) bad("calibration.seconds", "must be > 0");
  if (!(calibration.max_dt > 0.0)) bad("calibration.max_dt", "must be > 0");
  if (placeholder_frames < 0) bad("placeholder_frames", "must be >= 0");
  if (max_lag_frames < 0) bad("max_lag_frames", "must be >= 0");
  if (mocap.latency_frames + mocap.jitter_frames > max_lag_frames) {
    bad("max_lag_frames", "must cover mocap latency + jitter");
  }
  for (char c : name) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') bad("name", "may use [A-Za-z0-9_-] only");
  }
}

RunConfig run_config_from_json(const json& j) {
  RunConfig cfg;
  {
    Section root(j, "");
    root.read("name", cfg.name);
    root.read("users", cfg.users);
    root.read("seed", cfg.seed);
    root.read("output_dir", cfg.output_dir);
    root.read("correction_enabled", cfg.correction_enabled);
    root.read("latency_compensation", cfg.latency_compensation);
    root.read("leveled", cfg.leveled);
    root.read("placeholder_frames", cfg.placeholder_frames);
    root.read("max_lag_frames", cfg.max_lag_frames);
    if (const json* e = root.child("extrinsics")) cfg.extrinsics = pose_from_json(*e, "extrinsics");

    if (const json* sj = root.child("scenario")) {
      Section s(*sj, "scenario");
      std::string kind = sim::to_string(cfg.scenario.kind);
      s.read("kind", kind);
      cfg.scenario.kind = sim::motion_kind_from_string(kind);
      s.read("extent", cfg.scenario.extent);
      s.read("speed", cfg.scenario.speed);
      s.read("duration", cfg.scenario.duration);
      s.read("rate", cfg.scenario.rate);
      s.read("head_height", cfg.scenario.head_height);
      s.read("gait_surge", cfg.scenario.gait_surge);
      s.read("gait_bob", cfg.scenario.gait_bob);
      s.read_deg("look_down_deg", cfg.scenario.look_down);
      s.read_deg("nod_amplitude_deg", cfg.scenario.nod_amplitude);
    }
    if (const json* dj = root.child("drift")) {
      Section d(*dj, "drift");
      std::string mode = cfg.drift.mode == sim::DriftMode::kLinear ? "linear" : "random_walk";
      d.read("mode", mode);
      if (mode == "linear") {
        cfg.drift.mode = sim::DriftMode::kLinear;
      } else if (mode == "random_walk") {
        cfg.drift.mode = sim::DriftMode::kRandomWalk;
      } else {
        bad("drift.mode", "must be 'random_walk' or 'linear'");
      }
      d.read("position_drift_rate", cfg.drift.position_drift_rate);
      if (const json* b = d.child("bias_direction")) cfg.drift.bias_direction = vec3_from_json(*b, "drift.bias_direction");
      d.read_deg("yaw_drift_rate_deg_per_s", cfg.drift.yaw_drift_rate);
      d.read("white_noise_pos", cfg.drift.white_noise_pos);
      d.read("seed", cfg.drift.seed);
      if (const json* o = d.child("device_frame_offset")) {
        cfg.drift.device_frame_offset = pose_from_json(*o, "drift.device_frame_offset");
      }
      if (const json* l = d.child("tracking_loss")) {
        if (l->is_null()) {
          cfg.drift.tracking_loss.reset();
        } else {
          Section ls(*l, "drift.tracking_loss");
          sim::TrackingLoss loss;
          ls.read("time", loss.time);
          if (const json* jump = ls.child("jump")) loss.jump = pose_from_json(*jump, "drift.tracking_loss.jump");
          cfg.drift.tracking_loss = loss;
        }
      }
    }
    if (const json* mj = root.child("mocap")) {
      Section m(*mj, "mocap");
      m.read("rate", cfg.mocap.rate);
      m.read("noise_pos", cfg.mocap.noise_pos);
      m.read_deg("noise_rot_deg", cfg.mocap.noise_rot);
      m.read("latency_frames", cfg.mocap.latency_frames);
      m.read("jitter_frames", cfg.mocap.jitter_frames);
      m.read("seed", cfg.mocap.seed);
    }
    if (const json* cj = root.child("correction")) {
      Section c(*cj, "correction");
      c.read("position_threshold", cfg.correction.position_threshold);
      c.read_deg("yaw_threshold_deg", cfg.correction.yaw_threshold);
      c.read("sustain_frames", cfg.correction.sustain_frames);
      std::string mode = cfg.correction.mode == align::CorrectionMode::kSnap ? "snap" : "smooth";
      c.read("mode", mode);
      if (mode == "snap") {
        cfg.correction.mode = align::CorrectionMode::kSnap;
      } else if (mode == "smooth") {
        cfg.correction.mode = align::CorrectionMode::kSmooth;
      } else {
        bad("correction.mode", "must be 'snap' or 'smooth'");
      }
      c.read("smooth_duration", cfg.correction.smooth_duration);
    }
    if (const json* kj = root.child("calibration")) {
      Section k(*kj, "calibration");
      k.read("estimate", cfg.calibration.estimate);
      k.read("seconds", cfg.calibration.seconds);
      k.read("max_dt", cfg.calibration.max_dt);
      k.read("min_pairs", cfg.calibration.min_pairs);
    }
  }
  cfg.validate();
  return cfg;
}

json to_json(const RunConfig& cfg) {
  json j;
  j["name"] = cfg.name;
  j["users"] = cfg.users;
  j["seed"] = cfg.seed;
  j["output_dir"] = cfg.output_dir;
  j["correction_enabled"] = cfg.correction_enabled;
  j["latency_compensation"] = cfg.latency_compensation;
  j["leveled"] = cfg.leveled;
  j["placeholder_frames"] = cfg.placeholder_frames;
  j["max_lag_frames"] = cfg.max_lag_frames;
  j["extrinsics"] = pose_to_json(cfg.extrinsics);
  j["scenario"] = {{"kind", sim::to_string(cfg.scenario.kind)},
                   {"extent", cfg.scenario.extent},
                   {"speed", cfg.scenario.speed},
                   {"duration", cfg.scenario.duration},
                   {"rate", cfg.scenario.rate},
                   {"head_height", cfg.scenario.head_height},
                   {"gait_surge", cfg.scenario.gait_surge},
                   {"gait_bob", cfg.scenario.gait_bob},
                   {"look_down_deg", cfg.scenario.look_down / kDeg},
                   {"nod_amplitude_deg", cfg.scenario.nod_amplitude / kDeg}};
  json drift = {{"mode", cfg.drift.mode == sim::DriftMode::kLinear ? "linear" : "random_walk"},
                {"position_drift_rate", cfg.drift.position_drift_rate},
                {"bias_direction", vec3_json(cfg.drift.bias_direction)},
                {"yaw_drift_rate_deg_per_s", cfg.drift.yaw_drift_rate / kDeg},
                {"white_noise_pos", cfg.drift.white_noise_pos},
                {"seed", cfg.drift.seed},
                {"device_frame_offset", pose_to_json(cfg.drift.device_frame_offset)}};
  if (cfg.drift.tracking_loss) {
    drift["tracking_loss"] = {{"time", cfg.drift.tracking_loss->time},
                              {"jump", pose_to_json(cfg.drift.tracking_loss->jump)}};
  } else {
    drift["tracking_loss"] = nullptr;
  }
  j["drift"] = drift;
  j["mocap"] = {{"rate", cfg.mocap.rate},
                {"noise_pos", cfg.mocap.noise_pos},
                {"noise_rot_deg", cfg.mocap.noise_rot / kDeg},
                {"latency_frames", cfg.mocap.latency_frames},
                {"jitter_frames", cfg.mocap.jitter_frames},
                {"seed", cfg.mocap.seed}};
  j["correction"] = {{"position_threshold", cfg.correction.position_threshold},
                     {"yaw_threshold_deg", cfg.correction.yaw_threshold / kDeg},
                     {"sustain_frames", cfg.correction.sustain_frames},
                     {"mode", cfg.correction.mode == align::CorrectionMode::kSnap ? "snap" : "smooth"},
                     {"smooth_duration", cfg.correction.smooth_duration}};
  j["calibration"] = {{"estimate", cfg.calibration.estimate},
                      {"seconds", cfg.calibration.seconds},
                      {"max_dt", cfg.calibration.max_dt},
                      {"min_pairs", cfg.calibration.min_pairs}};
  return j;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config: " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kInvalidArgument, "config " + path.string() + ": " + e.what());
  }
  return run_config_from_json(j);
}

}  // namespace coloc
