#include <doctest.h>

#include <cstring>
#include <set>

#include "coloc/calib.hpp"
#include "coloc/error.hpp"
#include "coloc/net/packet.hpp"
#include "coloc/sim.hpp"
#include "helpers.hpp"

using namespace coloc;
using namespace coloc::sim;
using namespace coloc::test;

namespace {

MotionSpec spec_of(MotionKind kind, double extent, double duration) {
  MotionSpec s;
  s.kind = kind;
  s.extent = extent;
  s.duration = duration;
  return s;
}

bool bit_equal(const Trajectory& a, const Trajectory& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::memcmp(&a[i].t, &b[i].t, sizeof(double)) != 0) return false;
    if (std::memcmp(a[i].pose.translation.data(), b[i].pose.translation.data(), 3 * sizeof(double)) != 0) return false;
    if (std::memcmp(a[i].pose.rotation.coeffs().data(), b[i].pose.rotation.coeffs().data(), 4 * sizeof(double)) != 0)
      return false;
  }
  return true;
}

Vec3 horizontal_forward(const Quat& q) {
  Vec3 f = q * kForward.vector;
  f.y() = 0.0;
  return f.normalized();
}

}  // namespace

TEST_CASE("motion spec validation") {
  MotionSpec s;
  CHECK_NOTHROW(s.validate());
  s.speed = 0;
  CHECK_THROWS_AS(s.validate(), Error);
  s = {};
  s.rate = -1;
  CHECK_THROWS_AS(s.validate(), Error);
  s = {};
  s.kind = MotionKind::kLine;
  s.extent = 8.0;  // longer than the tracking area
  CHECK_THROWS_AS(gen_motion(s), Error);
  CHECK(motion_kind_from_string("patrol") == MotionKind::kPatrol);
  CHECK_THROWS_AS(motion_kind_from_string("spiral"), Error);
}

TEST_CASE("circle faces the centre at every sample") {
  const auto m = gen_motion(spec_of(MotionKind::kCircle, 2.0, 20.0));
  REQUIRE(m.users.size() == 1);
  const auto& head = m.users[0].head;
  CHECK(head.size() == 2001);  // both endpoints
  for (const auto& s : head.samples) {
    Vec3 to_centre = -s.pose.translation;
    to_centre.y() = 0;
    CHECK((horizontal_forward(s.pose.rotation) - to_centre.normalized()).norm() < 1e-9);
    CHECK(std::abs(to_centre.norm() - 2.0) < 1e-12);
  }
}

TEST_CASE("line of 4 m at 1 m/s spans [0, 4] and reverses every 4 s") {
  for (double surge : {0.0, 0.015}) {
    MotionSpec s = spec_of(MotionKind::kLine, 4.0, 24.0);
    s.gait_surge = surge;
    const auto m = gen_motion(s);
    const auto& head = m.users[0].head;
    double lo = 1e9, hi = -1e9;
    for (const auto& smp : head.samples) {
      lo = std::min(lo, smp.pose.translation.x());
      hi = std::max(hi, smp.pose.translation.x());
      CHECK(smp.pose.translation.z() == 0.0);
    }
    CHECK(std::abs(lo) < 1e-9);
    CHECK(std::abs(hi - 4.0) < 1e-9);
    // Ends are reached exactly at multiples of 4 s.
    for (int leg = 0; leg <= 6; ++leg) {
      const double x = head[static_cast<std::size_t>(leg * 400)].pose.translation.x();
      CHECK(std::abs(x - (leg % 2 == 0 ? 0.0 : 4.0)) < 1e-9);
    }
    // Heading points along +x on even legs and -x on odd legs, away from turns.
    for (std::size_t k = 0; k < head.size(); ++k) {
      const double t = head[k].t;
      const double in_leg = std::fmod(t, 4.0);
      if (in_leg < 0.3 || in_leg > 3.7) continue;
      const int leg = static_cast<int>(t / 4.0);
      const double want = leg % 2 == 0 ? 90 * kDeg : -90 * kDeg;
      CHECK(std::abs(wrap_angle(yaw_of(head[k].pose.rotation) - want)) < 1e-9);
    }
  }
}

TEST_CASE("patrol shows exactly four headings 90 degrees apart outside turns") {
  const auto m = gen_motion(spec_of(MotionKind::kPatrol, 3.0, 30.0));
  const auto& head = m.users[0].head;
  std::set<long> headings;
  for (const auto& s : head.samples) {
    const double in_leg = std::fmod(s.t, 3.0);
    if (in_leg < 0.3 || in_leg > 2.7) continue;
    headings.insert(std::lround(yaw_of(s.pose.rotation) / kDeg));
  }
  CHECK(headings == std::set<long>{-90, 0, 90, 180});

  // Forward is tangent to the motion in the middle of each side.
  for (std::size_t k = 1; k + 1 < head.size(); ++k) {
    const double in_leg = std::fmod(head[k].t, 3.0);
    if (in_leg < 0.5 || in_leg > 2.5) continue;
    Vec3 v = head[k + 1].pose.translation - head[k - 1].pose.translation;
    v.y() = 0;
    CHECK((horizontal_forward(head[k].pose.rotation) - v.normalized()).norm() < 1e-9);
  }
}

TEST_CASE("fistbump contacts: four events with controllers meeting") {
  MotionSpec s = spec_of(MotionKind::kFistbump, 2.0, 40.0);
  const auto m = gen_motion(s);
  REQUIRE(m.users.size() == 2);
  REQUIRE(m.contacts.size() == 4);
  for (const auto& c : m.contacts) {
    const Vec3 a = (*m.users[0].right_hand)[c.frame].pose.translation;
    const Vec3 b = (*m.users[1].right_hand)[c.frame].pose.translation;
    CHECK((a - b).norm() < 0.02);
    CHECK((a - c.point).norm() < 0.02);
  }
  for (const auto& u : m.users) {
    REQUIRE(u.left_hand);
    REQUIRE(u.right_hand);
    CHECK(u.right_hand->size() == u.head.size());
  }
}

TEST_CASE("slam_track: zero config is bit-exact identity") {
  const auto gt = gen_motion(spec_of(MotionKind::kCircle, 2.0, 5.0)).users[0].head;
  DriftConfig cfg;
  CHECK(bit_equal(slam_track(gt, cfg), gt));
}

TEST_CASE("slam_track: linear bias closed form") {
  const auto gt = gen_motion(spec_of(MotionKind::kCircle, 2.0, 10.01)).users[0].head;
  DriftConfig cfg;
  cfg.mode = DriftMode::kLinear;
  cfg.position_drift_rate = 0.01;
  cfg.bias_direction = Vec3::UnitX();
  const auto cam = slam_track(gt, cfg);
  REQUIRE(cam.size() > 1000);
  CHECK(cam[1000].t == 10.0);
  const Vec3 err = cam[1000].pose.translation - gt[1000].pose.translation;
  CHECK(std::abs(err.norm() - 0.10) < 1e-12);
  CHECK(std::abs(err.x() - 0.10) < 1e-12);
  CHECK(geodesic_angle(cam[1000].pose.rotation, gt[1000].pose.rotation) < 1e-12);
}

TEST_CASE("slam_track: tracking loss jump persists") {
  const auto gt = gen_motion(spec_of(MotionKind::kLine, 4.0, 10.0)).users[0].head;
  DriftConfig cfg;
  cfg.tracking_loss = TrackingLoss{5.0, Pose::from_translation({0.5, 0, 0})};
  const auto cam = slam_track(gt, cfg);
  for (std::size_t k = 0; k < gt.size(); ++k) {
    const double d = (cam[k].pose.translation - gt[k].pose.translation).norm();
    if (gt[k].t < 5.0) {
      CHECK(d == 0.0);
    } else {
      CHECK(std::abs(d - 0.5) < 1e-12);
    }
  }
}

TEST_CASE("slam_track: yaw drift rate and determinism") {
  const auto gt = gen_motion(spec_of(MotionKind::kPatrol, 3.0, 20.0)).users[0].head;
  DriftConfig cfg;
  cfg.position_drift_rate = 0.001;
  cfg.yaw_drift_rate = 0.001;
  cfg.white_noise_pos = 2e-4;
  cfg.seed = 99;
  const auto a = slam_track(gt, cfg);
  const auto b = slam_track(gt, cfg);
  CHECK(bit_equal(a, b));
  cfg.seed = 100;
  CHECK_FALSE(bit_equal(a, slam_track(gt, cfg)));

  DriftConfig yaw_only_cfg;
  yaw_only_cfg.yaw_drift_rate = 0.002;
  const auto y = slam_track(gt, yaw_only_cfg);
  const double dyaw = wrap_angle(yaw_of(y.samples.back().pose.rotation) - yaw_of(gt.samples.back().pose.rotation));
  CHECK(dyaw == doctest::Approx(0.002 * gt.samples.back().t).epsilon(1e-9));

  DriftConfig bad;
  bad.white_noise_pos = -1;
  CHECK_THROWS_AS(slam_track(gt, bad), Error);
}

TEST_CASE("mocap_observe: handedness only, and 7-frame latency") {
  const auto gt = gen_motion(spec_of(MotionKind::kCircle, 2.0, 5.0)).users[0].head;
  MocapObserverConfig cfg;
  cfg.noise_pos = 0;
  cfg.latency_frames = 0;
  const auto plain = mocap_observe(gt, Pose::identity(), cfg);
  REQUIRE(plain.available.size() == gt.size());
  for (std::size_t k = 0; k < gt.size(); ++k) {
    const Pose want = convert_handedness(gt[k].pose);
    CHECK(plain.available[k].t == gt[k].t);
    CHECK(pos_err(plain.available[k].pose, want) == 0.0);
    CHECK(rot_err(plain.available[k].pose, want) < 1e-12);
  }

  cfg.latency_frames = 7;
  const auto late = mocap_observe(gt, Pose::identity(), cfg);
  for (std::size_t k = 0; k < gt.size(); ++k) {
    CHECK(std::abs(late.available[k].t - (gt[k].t + 0.070)) < 1e-12);
    CHECK(late.delay_frames[k] == 7);
  }
}

TEST_CASE("mocap_observe: inverse composition recovers the eye pose") {
  const auto gt = gen_motion(spec_of(MotionKind::kPatrol, 3.0, 10.0)).users[0].head;
  const Pose extrinsics{rot_x(15 * kDeg), Vec3(0.02, 0.08, 0.10)};
  MocapObserverConfig cfg;
  cfg.noise_rot = 0.1 * kDeg;
  const auto obs = mocap_observe(gt, inverse(extrinsics), cfg);
  const double pos_bound = 6 * cfg.noise_pos + 0.15 * 6 * cfg.noise_rot;
  for (std::size_t k = 0; k < gt.size(); ++k) {
    const Pose eye = compose(convert_handedness(obs.available[k].pose), extrinsics);
    CHECK(pos_err(eye, gt[k].pose) < pos_bound);
    CHECK(rot_err(eye, gt[k].pose) < 6 * std::sqrt(3.0) * cfg.noise_rot);
  }
  const auto again = mocap_observe(gt, inverse(extrinsics), cfg);
  CHECK(bit_equal(obs.available, again.available));
}

TEST_CASE("mocap_observe: jitter keeps arrival order") {
  const auto gt = gen_motion(spec_of(MotionKind::kLine, 4.0, 5.0)).users[0].head;
  MocapObserverConfig cfg;
  cfg.jitter_frames = 3;
  const auto obs = mocap_observe(gt, Pose::identity(), cfg);
  for (std::size_t k = 1; k < obs.available.size(); ++k) CHECK(obs.available[k].t > obs.available[k - 1].t);
  for (int d : obs.delay_frames) {
    CHECK(d >= 7);
    CHECK(d <= 10);
  }
}

TEST_CASE("closed loop: observe, encode, decode, calibrate") {
  const auto gt = gen_motion(spec_of(MotionKind::kPatrol, 3.0, 15.0)).users[0].head;
  const Pose extrinsics{rot_x(15 * kDeg), Vec3(0.02, 0.08, 0.10)};
  MocapObserverConfig cfg;
  cfg.latency_frames = 0;
  cfg.noise_rot = 0.1 * kDeg;
  const auto obs = mocap_observe(gt, inverse(extrinsics), cfg);

  std::vector<std::uint8_t> bytes;
  for (std::size_t k = 0; k < obs.available.size(); ++k) {
    net::RigidBodyPacket p;
    p.frame_number = static_cast<std::uint32_t>(k);
    p.timestamp_us = static_cast<std::uint64_t>(std::llround(obs.capture_times[k] * 1e6));
    p.bodies.push_back(net::make_body(1, convert_handedness(obs.available[k].pose)));
    net::append_packet(bytes, p);
  }
  const auto packets = net::decode_capture(bytes);
  REQUIRE(packets.size() == gt.size());
  std::vector<calib::PosePair> pairs;
  for (std::size_t k = 0; k < packets.size(); ++k) {
    pairs.push_back({net::body_pose(packets[k].bodies[0]), gt[k].pose});
  }
  const auto est = calib::estimate_extrinsics(pairs);
  CHECK(pos_err(est.transform, extrinsics) < 0.002);
  CHECK(rot_err(est.transform, extrinsics) < 0.2 * kDeg);
}
