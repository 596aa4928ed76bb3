#pragma once

// Run configuration: one JSON document selecting the motion scenario, the
// tracker drift model, the mocap observer and the correction policy.
// Every field is optional; omitted fields take the defaults below and the
// fully-resolved document is echoed into run outputs. Unknown keys are
// rejected. Angles are given in degrees in the file (`*_deg` keys).

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "coloc/align.hpp"
#include "coloc/geom.hpp"
#include "coloc/sim.hpp"

namespace coloc {

struct CalibrationSettings {
  // true: run a pre-calibration session and estimate extrinsics + latency;
  // false: use the true mount offset and the configured latency.
  bool estimate = true;
  double seconds = 30.0;
  double max_dt = 0.005;
  std::size_t min_pairs = 50;
};

struct RunConfig {
  std::string name;  // output file prefix; defaults to the scenario kind
  sim::MotionSpec scenario;
  sim::DriftConfig drift;
  sim::MocapObserverConfig mocap;
  align::CorrectionConfig correction;
  bool correction_enabled = true;
  bool latency_compensation = true;
  bool leveled = true;  // position + yaw origin solve; false = full 6-DoF
  int users = 1;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  // True mounting offset of the mocap body: eye = mocap * extrinsics.
  Pose extrinsics;
  CalibrationSettings calibration;
  int placeholder_frames = 25;
  int max_lag_frames = 30;

  RunConfig();
  std::string prefix() const;
  // Throws Error(kInvalidArgument) with the offending key.
  void validate() const;
};

RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& cfg);
RunConfig load_run_config(const std::filesystem::path& path);

nlohmann::json pose_to_json(const Pose& p);
Pose pose_from_json(const nlohmann::json& j, const std::string& key);

}  // namespace coloc
