#include "coloc/trajectory.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "coloc/error.hpp"

namespace coloc {

namespace {
constexpr const char* kHeader = "t,px,py,pz,qw,qx,qy,qz";
}

void Trajectory::validate() const {
  if (!(nominal_rate_hz > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "trajectory nominal rate must be > 0");
  }
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (!(samples[i].t > samples[i - 1].t)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "trajectory timestamps not strictly increasing at index " + std::to_string(i));
    }
  }
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << kHeader << '\n';
  char line[512];
  for (const auto& s : traj.samples) {
    const auto& p = s.pose.translation;
    const auto& q = s.pose.rotation;
    std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.t,
                  p.x(), p.y(), p.z(), q.w(), q.x(), q.y(), q.z());
    out << line;
  }
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open for writing: " + path.string());
  write_trajectory_csv(out, traj);
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

Trajectory read_trajectory_csv(std::istream& in, double nominal_rate_hz) {
  Trajectory traj;
  traj.nominal_rate_hz = nominal_rate_hz;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kIo, "empty trajectory file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) {
    throw Error(ErrorCode::kIo, "unexpected trajectory header '" + line + "'");
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    double v[8];
    std::istringstream row(line);
    std::string cell;
    int n = 0;
    while (n < 8 && std::getline(row, cell, ',')) {
      try {
        std::size_t used = 0;
        v[n] = std::stod(cell, &used);
      } catch (const std::exception&) {
        throw Error(ErrorCode::kIo, "bad number on line " + std::to_string(lineno));
      }
      ++n;
    }
    if (n != 8) throw Error(ErrorCode::kIo, "expected 8 columns on line " + std::to_string(lineno));
    TrajectorySample s;
    s.t = v[0];
    s.pose.translation = Vec3(v[1], v[2], v[3]);
    s.pose.rotation = Quat(v[4], v[5], v[6], v[7]);
    const double norm = s.pose.rotation.norm();
    if (!(std::abs(norm - 1.0) < 1e-6)) {
      throw Error(ErrorCode::kIo, "non-unit quaternion on line " + std::to_string(lineno));
    }
    traj.samples.push_back(s);
  }
  traj.validate();
  return traj;
}

Trajectory read_trajectory_csv(const std::filesystem::path& path, double nominal_rate_hz) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open trajectory: " + path.string());
  try {
    return read_trajectory_csv(in, nominal_rate_hz);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

Pose interpolate(const Trajectory& traj, double t) {
  const auto& s = traj.samples;
  if (s.empty()) throw Error(ErrorCode::kInvalidArgument, "interpolate on empty trajectory");
  if (t <= s.front().t) return s.front().pose;
  if (t >= s.back().t) return s.back().pose;
  auto hi = std::upper_bound(s.begin(), s.end(), t,
                             [](double value, const TrajectorySample& x) { return value < x.t; });
  auto lo = hi - 1;
  const double u = (t - lo->t) / (hi->t - lo->t);
  if (u == 0.0) return lo->pose;
  Pose out;
  out.translation = lo->pose.translation + u * (hi->pose.translation - lo->pose.translation);
  out.rotation = lo->pose.rotation.slerp(u, align_sign(hi->pose.rotation, lo->pose.rotation)).normalized();
  return out;
}

}  // namespace coloc
