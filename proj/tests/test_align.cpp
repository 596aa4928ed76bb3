#include <doctest.h>

#include <chrono>
#include <random>

#include "coloc/align.hpp"
#include "coloc/error.hpp"
#include "helpers.hpp"

using namespace coloc;
using namespace coloc::align;
using namespace coloc::test;

TEST_CASE("eye_world examples") {
  std::mt19937_64 rng(1);
  const Pose m = random_pose(rng);
  calib::Extrinsics ex;
  CHECK(pos_err(eye_world(m, ex), m) == 0.0);
  ex.transform = Pose::from_translation({0, 0.1, 0});
  CHECK(pos_err(eye_world(Pose::identity(), ex), ex.transform) == 0.0);

  // Forward simulation: eye = mocap body moved by the fixed mount offset.
  ex.transform = {rot_x(15 * kDeg), Vec3(0.02, 0.08, 0.10)};
  const Vec3 expected = m.translation + m.rotation * ex.transform.translation;
  const Pose e = eye_world(m, ex);
  CHECK((e.translation - expected).norm() < 1e-9);
  CHECK(geodesic_angle(e.rotation, m.rotation * ex.transform.rotation) < 1e-9);
}

TEST_CASE("solve_origin_full examples and identity over 10^4 pairs") {
  std::mt19937_64 rng(2);
  const Pose e = random_pose(rng);
  const Pose o = solve_origin_full(e, Pose::identity());
  CHECK(pos_err(o, e) < 1e-15);
  CHECK(rot_err(o, e) < 1e-12);
  CHECK((solve_origin_full(Pose::identity(), Pose::from_translation({0, 1.7, 0})).translation - Vec3(0, -1.7, 0))
            .norm() < 1e-15);

  double worst_p = 0, worst_r = 0;
  for (int i = 0; i < 10000; ++i) {
    const Pose eye = random_pose(rng), cam = random_pose(rng);
    const Pose back = compose(solve_origin_full(eye, cam), cam);
    worst_p = std::max(worst_p, pos_err(back, eye));
    worst_r = std::max(worst_r, rot_err(back, eye));
  }
  CHECK(worst_p < 1e-9);
  CHECK(worst_r < 1e-9);
}

TEST_CASE("solve_origin_leveled examples") {
  const Pose eye{rot_x(-30 * kDeg), Vec3(1, 1.7, 2)};
  const Pose cam{rot_x(-30 * kDeg), Vec3(0.3, 1.6, -0.2)};
  const Pose o = solve_origin_leveled(eye, cam);
  CHECK(geodesic_angle(o.rotation, Quat::Identity()) < 1e-12);
  CHECK((compose(o, cam).translation - eye.translation).norm() < 1e-12);

  const Pose o2 = solve_origin_leveled(Pose::from_rotation(rot_y(60 * kDeg)), Pose::from_rotation(rot_y(45 * kDeg)));
  CHECK(yaw_of(o2.rotation) == doctest::Approx(15 * kDeg).epsilon(1e-12));

  const Pose e3{rot_y(20 * kDeg) * rot_x(10 * kDeg), Vec3(1, 2, 3)};
  const Pose o3 = solve_origin_leveled(e3, Pose::identity());
  CHECK(geodesic_angle(o3.rotation, yaw_only(e3.rotation)) < 1e-12);
  CHECK((o3.translation - e3.translation).norm() < 1e-15);

  CHECK_THROWS_AS(solve_origin_leveled(Pose::from_rotation(rot_x(kPi / 2)), Pose::identity()), Error);
}

TEST_CASE("solve_origin_leveled properties") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10000; ++i) {
    const Pose eye = random_pose(rng), cam = random_pose(rng);
    const Pose o = solve_origin_leveled(eye, cam);
    const Vec3 up = o.rotation * kWorldUp.vector;
    CHECK((up - kWorldUp.vector).norm() < 1e-12);
    CHECK(o.rotation.x() == 0.0);
    CHECK(o.rotation.z() == 0.0);
    const Pose aligned = compose(o, cam);
    CHECK((aligned.translation - eye.translation).norm() < 1e-9);
    CHECK(std::abs(wrap_angle(yaw_of(aligned.rotation) - yaw_of(eye.rotation))) < 1e-9);
  }
}

TEST_CASE("walking forward after a pitched alignment stays on the floor plane") {
  // Headset pitched 30 degrees down at alignment; the tracker's local frame
  // is level, the mocap-derived eye pose carries the pitch.
  const Pose eye{rot_x(30 * kDeg), Vec3(0, 1.7, 0)};
  const Pose cam0{Quat::Identity(), Vec3(0, 1.7, 0)};
  const Pose leveled = solve_origin_leveled(eye, cam0);
  const Pose naive = solve_origin_full(eye, cam0);

  const Pose cam1{Quat::Identity(), Vec3(0, 1.7, 1.0)};  // 1 m step, horizontal
  const Vec3 d_level = compose(leveled, cam1).translation - compose(leveled, cam0).translation;
  const Vec3 d_naive = compose(naive, cam1).translation - compose(naive, cam0).translation;
  CHECK(std::abs(d_level.y()) < 1e-9);
  CHECK(d_level.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(d_naive.y()) > 0.4);
  CHECK(std::abs(d_naive.y()) == doctest::Approx(std::sin(30 * kDeg)).epsilon(1e-12));
}

TEST_CASE("drift_residual examples") {
  std::mt19937_64 rng(4);
  const Pose p = random_pose(rng);
  const Residual z = drift_residual(p, p);
  CHECK(z.position_error == 0.0);
  CHECK(z.yaw_error == 0.0);

  const Pose a{rot_y(10 * kDeg), Vec3(0.05, 0, 0)};
  const Residual r = drift_residual(a, Pose::identity());
  CHECK(r.position_error == doctest::Approx(0.05).epsilon(1e-14));
  CHECK(r.yaw_error == doctest::Approx(10 * kDeg).epsilon(1e-12));

  const Residual pitch = drift_residual(Pose::from_rotation(rot_x(20 * kDeg)), Pose::identity());
  CHECK(pitch.position_error == 0.0);
  CHECK(std::abs(pitch.yaw_error) < 1e-15);
}

TEST_CASE("correction config validation") {
  CorrectionConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.sustain_frames = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.position_threshold = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.smooth_duration = -1;
  CHECK_THROWS_AS(cfg.validate(), Error);
  CHECK_THROWS_AS(correction_step({}, {}, Pose{}, CorrectionConfig{}, 0.0), Error);
}

TEST_CASE("compliant residuals never leave monitoring") {
  CorrectionConfig cfg;
  AlignmentState s;
  s.origin = Pose::from_translation({1, 2, 3});
  const Pose target = Pose::from_translation({9, 9, 9});
  for (int i = 0; i < 1000; ++i) {
    s = correction_step(s, {0.029, 4.9 * kDeg}, target, cfg, 0.01);
    CHECK(s.phase == Phase::kMonitoring);
    CHECK(s.consecutive_violations == 0);
  }
  CHECK(s.origin.translation == Vec3(1, 2, 3));
}

TEST_CASE("correcting is entered exactly on the third violating step") {
  CorrectionConfig cfg;
  cfg.sustain_frames = 3;
  AlignmentState s;
  const Residual bad{0.05, 0.0};
  s = correction_step(s, bad, Pose{}, cfg, 0.01);
  CHECK(s.phase == Phase::kMonitoring);
  CHECK(s.consecutive_violations == 1);
  s = correction_step(s, bad, Pose{}, cfg, 0.01);
  CHECK(s.phase == Phase::kMonitoring);
  CHECK(s.consecutive_violations == 2);
  s = correction_step(s, bad, Pose{}, cfg, 0.01);
  CHECK(s.phase == Phase::kCorrecting);
  CHECK(s.consecutive_violations == 3);

  // Yaw alone also counts as a violation.
  AlignmentState y;
  for (int i = 0; i < 3; ++i) y = correction_step(y, {0.0, -6 * kDeg}, Pose{}, cfg, 0.01);
  CHECK(y.phase == Phase::kCorrecting);
}

TEST_CASE("single-frame spikes never trigger a correction") {
  CorrectionConfig cfg;
  cfg.sustain_frames = 2;
  AlignmentState s;
  for (int i = 0; i < 500; ++i) {
    const Residual r = i % 2 == 0 ? Residual{0.5, 0.0} : Residual{0.0, 0.0};
    s = correction_step(s, r, Pose::from_translation({1, 0, 0}), cfg, 0.01);
    CHECK(s.phase == Phase::kMonitoring);
    CHECK(s.consecutive_violations <= 1);
  }
  CHECK(s.origin.translation == Vec3::Zero());
}

namespace {

AlignmentState trigger(AlignmentState s, const Pose& target, const CorrectionConfig& cfg) {
  for (int i = 0; i < cfg.sustain_frames; ++i) s = correction_step(s, {1.0, 0.0}, target, cfg, 0.01);
  return s;
}

}  // namespace

TEST_CASE("smooth correction completes after smooth_duration with a linear midpoint") {
  CorrectionConfig cfg;
  cfg.sustain_frames = 1;
  cfg.mode = CorrectionMode::kSmooth;
  cfg.smooth_duration = 0.5;
  AlignmentState s;
  s.origin = {rot_y(10 * kDeg), Vec3(0, 0, 0)};
  const Pose start = s.origin;
  const Pose target{rot_y(30 * kDeg), Vec3(0.2, 0, -0.1)};
  s = trigger(s, target, cfg);
  REQUIRE(s.phase == Phase::kCorrecting);

  for (int step = 1; step <= 50; ++step) {
    s = correction_step(s, {1.0, 0.0}, target, cfg, 0.01);
    if (step == 25) {
      CHECK((s.origin.translation - 0.5 * (start.translation + target.translation)).norm() < 1e-9);
      CHECK(yaw_of(s.origin.rotation) == doctest::Approx(20 * kDeg).epsilon(1e-9));
      CHECK(s.progress == doctest::Approx(0.5));
    }
    if (step < 50) {
      CHECK(s.phase == Phase::kCorrecting);
      CHECK(s.progress >= 0.0);
      CHECK(s.progress <= 1.0);
    }
  }
  CHECK(s.phase == Phase::kMonitoring);
  CHECK(s.consecutive_violations == 0);
  CHECK(pos_err(s.origin, target) == 0.0);
  CHECK(rot_err(s.origin, target) == 0.0);
}

TEST_CASE("snap and smooth converge to the same origin") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Pose target{yaw_rotation(std::uniform_real_distribution<double>(-3, 3)(rng)), random_vec(rng)};
    CorrectionConfig snap;
    snap.mode = CorrectionMode::kSnap;
    CorrectionConfig smooth;
    smooth.mode = CorrectionMode::kSmooth;
    AlignmentState a = trigger({}, target, snap), b = trigger({}, target, smooth);
    a = correction_step(a, {1.0, 0.0}, target, snap, 0.01);
    CHECK(a.phase == Phase::kMonitoring);
    for (int i = 0; i < 200 && b.phase == Phase::kCorrecting; ++i) b = correction_step(b, {1.0, 0.0}, target, smooth, 0.01);
    CHECK(b.phase == Phase::kMonitoring);
    CHECK(pos_err(a.origin, b.origin) == 0.0);
    CHECK(rot_err(a.origin, b.origin) == 0.0);
  }
}

TEST_CASE("leveled correction keeps the origin yaw-only") {
  std::mt19937_64 rng(6);
  CorrectionConfig cfg;
  cfg.sustain_frames = 1;
  AlignmentState s;
  for (int k = 0; k < 20; ++k) {
    const Pose target = solve_origin_leveled(random_pose(rng), random_pose(rng));
    s = trigger(s, target, cfg);
    while (s.phase == Phase::kCorrecting) {
      s = correction_step(s, {1.0, 0.0}, target, cfg, 0.01);
      CHECK(std::abs(s.origin.rotation.x()) < 1e-9);
      CHECK(std::abs(s.origin.rotation.z()) < 1e-9);
    }
  }
}

TEST_CASE("alignment identity over 10^4 pairs runs quickly") {
  std::mt19937_64 rng(7);
  std::vector<std::pair<Pose, Pose>> pairs;
  for (int i = 0; i < 10000; ++i) pairs.emplace_back(random_pose(rng), random_pose(rng));
  const auto t0 = std::chrono::steady_clock::now();
  double sink = 0;
  for (const auto& [e, c] : pairs) {
    sink += compose(solve_origin_full(e, c), c).translation.x();
    sink += compose(solve_origin_leveled(e, c), c).translation.x();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(std::isfinite(sink));
  CHECK(secs < 1.0);
}
