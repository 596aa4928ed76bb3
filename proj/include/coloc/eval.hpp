#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "coloc/geom.hpp"
#include "coloc/trajectory.hpp"

namespace coloc::eval {

inline constexpr int kMetricsSchemaVersion = 1;

struct PositionError {
  double t;
  Vec3 error;  // est - ref
};

struct AteResult {
  double rmse = 0.0;
  std::size_t sample_count = 0;
  double sum_squared = 0.0;
  std::vector<PositionError> series;
};

// RMS position error over nearest-timestamp pairs, in the shared world frame
// with no re-alignment. Throws Error(kInsufficientData) below two pairs.
AteResult ate(const Trajectory& est, const Trajectory& ref, double max_dt);
double ate_rmse(const Trajectory& est, const Trajectory& ref, double max_dt);

// SLAM-benchmark style: est is first rigidly registered onto ref.
double ate_rmse_aligned(const Trajectory& est, const Trajectory& ref, double max_dt);

struct LatencyEstimate {
  int lag_frames = 0;
  double latency = 0.0;  // seconds
  double rate = 100.0;
  double peak_correlation = 0.0;
  bool tie = false;  // another lag reached the same peak; smallest |lag| kept
};

// Lag of sig_b behind sig_a (positive: b is delayed), from the normalized
// cross-correlation of zero-mean speed signals on a common grid at `rate`.
// Throws Error(kUndefinedCorrelation) for (near-)constant speed.
LatencyEstimate estimate_latency(const Trajectory& sig_a, const Trajectory& sig_b, double rate = 100.0,
                                 int max_lag_frames = 30);

// Frame-to-frame displacement magnitudes of `traj` resampled at `rate` over
// [t0, t0 + (n-1)/rate].
std::vector<double> speed_signal(const Trajectory& traj, double t0, std::size_t n, double rate);

struct TrajectoryMetrics {
  std::string name;
  AteResult ate;
  std::optional<double> ate_latency_compensated;
  std::optional<double> ate_aligned;
};

struct ContactMarker {
  double t = 0.0;
  Vec3 point = Vec3::Zero();
};

struct MetricsReport {
  std::string scenario = "run";
  std::uint64_t seed = 0;
  double ate_rmse = 0.0;  // pooled over all entries
  std::size_t sample_count = 0;
  std::optional<double> ate_rmse_latency_compensated;
  std::optional<LatencyEstimate> latency;
  std::vector<TrajectoryMetrics> entries;
  std::vector<ContactMarker> contacts;
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json extra = nlohmann::json::object();

  nlohmann::json to_json() const;
};

struct PlotSeries {
  std::string name;
  std::string role;  // "est" or "ref"
  Trajectory trajectory;
};

// Writes `{scenario}_{seed}.json`, one CSV per series, an error-series CSV
// per entry and SVG plots: a top-down view for circuits, or a 3D + top-down
// pair per contact event. Returns the written paths.
std::vector<std::filesystem::path> export_report(const MetricsReport& report,
                                                 std::span<const PlotSeries> series,
                                                 const std::filesystem::path& out_dir);

}  // namespace coloc::eval
