#pragma once

// End-to-end simulated session: motion generation, drifting device tracking,
// delayed mocap observation streamed through the wire format, extrinsics
// pre-calibration, origin alignment with drift correction, and pose sharing
// through the hub. Everything is deterministic per RunConfig.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "coloc/align.hpp"
#include "coloc/calib.hpp"
#include "coloc/config.hpp"
#include "coloc/eval.hpp"
#include "coloc/sim.hpp"

namespace coloc::pipeline {

struct AlignmentEvent {
  std::size_t frame = 0;
  double t = 0.0;
  int user = 0;  // 1-based
  std::string kind;  // initial_alignment | correction_start | correction_end
  align::Residual residual;
};

struct UserRun {
  int user = 0;  // 1-based, equals the mocap body id and hub user id
  Trajectory gt;         // eye center, world
  Trajectory cam_local;  // device tracking frame
  Trajectory est;        // origin * cam_local, from the first alignment on
  Trajectory uncorrected;  // initial origin held fixed
  Trajectory mocap;      // received body poses (RH Z-up), stamped at arrival
  Trajectory eye_mocap;  // eye_world(mocap), engine frame, stamped at arrival
  std::optional<Trajectory> right_gt;
  std::optional<Trajectory> right_est;
  std::optional<Trajectory> right_peer;  // the other user's right hand as received from the hub
  calib::Extrinsics extrinsics;  // estimated (or true when estimation is off)
  eval::LatencyEstimate calibration_latency;
  std::size_t corrections = 0;
  std::size_t first_aligned_frame = 0;
};

struct ContactResult {
  std::size_t event = 0;  // 1-based
  std::size_t frame = 0;
  double t = 0.0;
  Vec3 point = Vec3::Zero();
  std::vector<double> user_errors;  // |right_est - point| per user
  std::vector<double> peer_errors;  // |right_peer - point| per user
};

struct SimulationResult {
  RunConfig config;
  std::vector<UserRun> users;
  std::vector<AlignmentEvent> events;
  std::vector<ContactResult> contacts;
  std::vector<std::uint8_t> mocap_capture;
  std::vector<std::uint8_t> hub_capture;
  eval::MetricsReport report;
};

SimulationResult run_simulation(const RunConfig& cfg);

// Writes every artifact under `dir` with the `{name}_{seed}` prefix and
// returns the paths in write order.
std::vector<std::filesystem::path> write_simulation(const SimulationResult& result,
                                                    const std::filesystem::path& dir);

// Mean position error over consecutive blocks of `block_seconds`.
std::vector<double> block_errors(const Trajectory& est, const Trajectory& ref, double block_seconds);

}  // namespace coloc::pipeline
