#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <unistd.h>

#include "coloc/error.hpp"
#include "coloc/eval.hpp"
#include "helpers.hpp"

using namespace coloc;
using namespace coloc::eval;
using namespace coloc::test;
namespace fs = std::filesystem;

namespace {

// Smooth motion with a non-periodic speed profile.
Vec3 wander(double t) {
  return {std::sin(0.7 * t) + 0.3 * std::sin(2.3 * t + 1.0), 1.6 + 0.05 * std::sin(3.1 * t),
          std::cos(0.5 * t) + 0.2 * std::sin(1.7 * t * t / 10.0)};
}

Trajectory sampled(double delay, std::size_t n, double noise = 0.0, std::uint64_t seed = 1, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, noise > 0 ? noise : 1.0);
  Trajectory traj;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / 100.0;
    Vec3 p = scale * wander(t - delay);
    if (noise > 0) p += Vec3(g(rng), g(rng), g(rng));
    traj.samples.push_back({t, Pose::from_translation(p)});
  }
  return traj;
}

Trajectory shifted(const Trajectory& in, const Vec3& offset) {
  Trajectory out = in;
  for (auto& s : out.samples) s.pose.translation += offset;
  return out;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("coloc_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_of(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("ate examples") {
  const Trajectory ref = sampled(0.0, 500);
  CHECK(ate_rmse(ref, ref, 0.005) == 0.0);
  CHECK(ate_rmse(shifted(ref, {0.03, 0, 0}), ref, 0.005) == doctest::Approx(0.03).epsilon(1e-12));

  Trajectory alt = ref;
  for (std::size_t k = 0; k < alt.size(); ++k) alt.samples[k].pose.translation.z() += k % 2 ? 0.04 : 0.03;
  const double want = std::sqrt((0.03 * 0.03 + 0.04 * 0.04) / 2.0);
  CHECK(ate_rmse(alt, ref, 0.005) == doctest::Approx(want).epsilon(1e-12));
  CHECK(std::abs(want - 0.03536) < 1e-5);

  const AteResult r = ate(alt, ref, 0.005);
  CHECK(r.sample_count == 500);
  CHECK(r.series.size() == 500);
  CHECK(r.series[1].error.z() == doctest::Approx(0.04));

  try {
    ate(Trajectory{{}, {{0.0, {}}}}, ref, 0.005);
    FAIL("expected insufficient data");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInsufficientData);
  }
}

TEST_CASE("ate is symmetric and invariant to a common rigid transform") {
  std::mt19937_64 rng(2);
  const Trajectory a = sampled(0.0, 800, 0.01, 3);
  const Trajectory b = sampled(0.0, 800, 0.01, 4);
  const double base = ate_rmse(a, b, 0.005);
  CHECK(ate_rmse(b, a, 0.005) == doctest::Approx(base).epsilon(1e-12));
  for (int trial = 0; trial < 20; ++trial) {
    const Pose g = random_pose(rng, 10.0);
    Trajectory ga = a, gb = b;
    for (auto& s : ga.samples) s.pose = compose(g, s.pose);
    for (auto& s : gb.samples) s.pose = compose(g, s.pose);
    CHECK(std::abs(ate_rmse(ga, gb, 0.005) - base) < 1e-9);
  }
}

TEST_CASE("aligned ate removes a rigid offset") {
  const Trajectory ref = sampled(0.0, 800);
  Trajectory est = ref;
  const Pose g{rot_y(0.3), Vec3(1, 0, -2)};
  for (auto& s : est.samples) s.pose = compose(g, s.pose);
  CHECK(ate_rmse(est, ref, 0.005) > 0.5);
  CHECK(ate_rmse_aligned(est, ref, 0.005) < 1e-9);
}

TEST_CASE("latency examples") {
  const Trajectory a = sampled(0.0, 3000);
  const auto seven = estimate_latency(a, sampled(0.07, 3000));
  CHECK(seven.lag_frames == 7);
  CHECK(seven.latency == doctest::Approx(0.070).epsilon(1e-12));
  CHECK(seven.peak_correlation > 0.99);

  const auto zero = estimate_latency(a, a);
  CHECK(zero.lag_frames == 0);
  CHECK(zero.latency == 0.0);

  const auto three = estimate_latency(sampled(0.0, 3000, 0.001, 11), sampled(0.03, 3000, 0.001, 12));
  CHECK(three.lag_frames == 3);
  CHECK(three.latency == doctest::Approx(0.030).epsilon(1e-12));
}

TEST_CASE("latency is antisymmetric and scale invariant") {
  const Trajectory a = sampled(0.0, 3000, 0.0005, 21);
  for (int lag : {1, 4, 7, 12}) {
    const Trajectory b = sampled(lag / 100.0, 3000, 0.0005, 22);
    const auto ab = estimate_latency(a, b);
    const auto ba = estimate_latency(b, a);
    CHECK(ab.lag_frames == lag);
    CHECK(ba.lag_frames == -ab.lag_frames);
    const Trajectory scaled = sampled(lag / 100.0, 3000, 0.0005 * 3.5, 22, 3.5);
    const auto sc = estimate_latency(a, scaled);
    CHECK(sc.lag_frames == ab.lag_frames);
    CHECK(sc.peak_correlation == doctest::Approx(ab.peak_correlation).epsilon(1e-9));
  }
}

TEST_CASE("latency on a constant signal is undefined") {
  Trajectory still = grid_trajectory(100.0, 500);
  try {
    estimate_latency(still, sampled(0.0, 500));
    FAIL("expected undefined correlation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUndefinedCorrelation);
  }
  // Constant velocity means constant speed.
  Trajectory cruise = grid_trajectory(100.0, 500);
  for (auto& s : cruise.samples) s.pose.translation = Vec3(s.t, 0, 0);
  CHECK_THROWS_AS(estimate_latency(cruise, cruise), Error);
}

TEST_CASE("speed signal is the resampled step length") {
  Trajectory line = grid_trajectory(100.0, 101);
  for (auto& s : line.samples) s.pose.translation = Vec3(2.0 * s.t, 0, 0);
  const auto v = speed_signal(line, 0.0, 101, 100.0);
  REQUIRE(v.size() == 100);
  for (double x : v) CHECK(x == doctest::Approx(0.02).epsilon(1e-9));
}

TEST_CASE("export: empty series writes only JSON") {
  const fs::path dir = fresh_dir("empty");
  MetricsReport rep;
  rep.scenario = "line";
  rep.seed = 3;
  const auto files = export_report(rep, {}, dir);
  REQUIRE(files.size() == 1);
  CHECK(files[0].filename() == "line_3.json");
  std::size_t n = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++n;
  CHECK(n == 1);
  const auto j = nlohmann::json::parse(slurp(files[0]));
  CHECK(j["schema_version"] == kMetricsSchemaVersion);
  CHECK(j["scenario"] == "line");
  CHECK(j["seed"] == 3);
  CHECK(j["latency"].is_null());
  fs::remove_all(dir);
}

TEST_CASE("export: line scenario gives one top-down SVG with est and ref") {
  const fs::path dir = fresh_dir("line");
  MetricsReport rep;
  rep.scenario = "line";
  rep.seed = 7;
  const Trajectory ref = sampled(0.0, 400);
  const Trajectory est = shifted(ref, {0.01, 0, 0});
  TrajectoryMetrics m;
  m.name = "user0_head";
  m.ate = ate(est, ref, 0.005);
  rep.entries.push_back(m);
  rep.ate_rmse = m.ate.rmse;
  rep.latency = estimate_latency(ref, est);
  const std::vector<PlotSeries> series = {{"user0_head", "est", est}, {"user0_head", "ref", ref}};
  const auto files = export_report(rep, series, dir);

  std::vector<fs::path> svgs;
  for (const auto& f : files) {
    CHECK(fs::exists(f));
    if (f.extension() == ".svg") svgs.push_back(f);
  }
  REQUIRE(svgs.size() == 1);
  CHECK(svgs[0].filename() == "line_7_topdown.svg");
  const std::string svg = slurp(svgs[0]);
  CHECK(count_of(svg, "<polyline") == 2);
  CHECK(count_of(svg, "user0_head (est)") == 1);
  CHECK(count_of(svg, "user0_head (ref)") == 1);
  CHECK(fs::exists(dir / "line_7_user0_head_est.csv"));
  CHECK(fs::exists(dir / "line_7_user0_head_errors.csv"));

  const auto j = nlohmann::json::parse(slurp(dir / "line_7.json"));
  CHECK(j["ate_rmse_m"].get<double>() == doctest::Approx(0.01));
  CHECK(j["trajectories"][0]["name"] == "user0_head");
  CHECK(j["trajectories"][0]["error_series_csv"] == "line_7_user0_head_errors.csv");
  CHECK(j["latency"]["lag_frames"].is_number_integer());
  fs::remove_all(dir);
}

TEST_CASE("export: fistbump gives a 3D and top-down pair per event") {
  const fs::path dir = fresh_dir("fist");
  MetricsReport rep;
  rep.scenario = "fistbump";
  rep.seed = 1;
  for (int e = 0; e < 4; ++e) rep.contacts.push_back({1.0 + e, Vec3(0, 1.35, 0)});
  const Trajectory t = sampled(0.0, 600);
  const std::vector<PlotSeries> series = {{"user0_right", "est", t}, {"user0_right", "ref", t}};
  const auto files = export_report(rep, series, dir);
  std::size_t n3d = 0, ntop = 0;
  for (const auto& f : files) {
    const std::string name = f.filename().string();
    if (name.ends_with("_3d.svg")) ++n3d;
    if (name.ends_with("_topdown.svg")) ++ntop;
  }
  CHECK(n3d == 4);
  CHECK(ntop == 4);
  for (int e = 1; e <= 4; ++e) {
    const std::string stem = "fistbump_1_event" + std::to_string(e);
    CHECK(fs::exists(dir / (stem + "_3d.svg")));
    const std::string svg = slurp(dir / (stem + "_topdown.svg"));
    CHECK(count_of(svg, "class=\"contact\"") == 1);
  }
  fs::remove_all(dir);
}

TEST_CASE("export surfaces I/O failures with the path") {
  const fs::path file = fresh_dir("blocker");
  std::ofstream(file) << "x";
  MetricsReport rep;
  try {
    export_report(rep, {}, file / "sub");
    FAIL("expected an I/O error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIo);
    CHECK(std::string(e.what()).find("sub") != std::string::npos);
  }
  fs::remove_all(file);
}
