#include <doctest.h>

#include <random>

#include "coloc/error.hpp"
#include "coloc/geom.hpp"
#include "helpers.hpp"

using namespace coloc;
using namespace coloc::test;

TEST_CASE("compose: identity, translations, rotated translation") {
  std::mt19937_64 rng(1);
  const Pose p = random_pose(rng);
  const Pose c = compose(Pose::identity(), p);
  CHECK(pos_err(c, p) < 1e-15);
  CHECK(rot_err(c, p) < 1e-12);

  const Pose t = compose(Pose::from_translation({1, 0, 0}), Pose::from_translation({0, 2, 0}));
  CHECK(pos_err(t, Pose::from_translation({1, 2, 0})) == 0.0);

  // Rotation matrix of rotZ(90) applied by hand to (1,0,0) is (0,1,0).
  const Pose r = compose(Pose::from_rotation(rot_z(kPi / 2)), Pose::from_translation({1, 0, 0}));
  CHECK(r.translation.isApprox(Vec3(0, 1, 0), 1e-15));
  CHECK(rot_err(r, Pose::from_rotation(rot_z(kPi / 2))) < 1e-12);
}

TEST_CASE("inverse examples") {
  CHECK(pos_err(inverse(Pose::identity()), Pose::identity()) == 0.0);
  CHECK(inverse(Pose::from_translation({1, 2, 3})).translation == Vec3(-1, -2, -3));

  const Pose p{rot_z(kPi / 2), Vec3(0, 1, 0)};
  const Pose inv = inverse(p);
  CHECK((inv.translation - Vec3(-1, 0, 0)).norm() < 1e-15);
  CHECK(geodesic_angle(inv.rotation, rot_z(-kPi / 2)) < 1e-12);
  const Pose id = compose(p, inv);
  CHECK(id.translation.norm() < 1e-15);
  CHECK(geodesic_angle(id.rotation, Quat::Identity()) < 1e-12);
}

TEST_CASE("pose algebra properties over random poses") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    const Pose a = random_pose(rng), b = random_pose(rng), c = random_pose(rng);
    const Pose l = compose(compose(a, b), c);
    const Pose r = compose(a, compose(b, c));
    CHECK(pos_err(l, r) < 1e-9);
    CHECK(rot_err(l, r) < 1e-9);

    const Pose e = compose(inverse(a), a);
    CHECK(e.translation.norm() < 1e-9);
    CHECK(geodesic_angle(e.rotation, Quat::Identity()) < 1e-9);
    CHECK(std::abs(l.rotation.norm() - 1.0) < 1e-9);
    CHECK(std::abs(inverse(a).rotation.norm() - 1.0) < 1e-9);
  }
}

TEST_CASE("yaw_of examples") {
  CHECK(yaw_of(Quat::Identity()) == 0.0);
  CHECK(yaw_of(axis_angle(kWorldUp.vector, 45 * kDeg)) == doctest::Approx(45 * kDeg).epsilon(1e-14));

  // Yaw 30 then pitch 20 about the rotated right axis: oracle is the heading
  // of the forward vector read off the rotation matrix.
  const Quat q = rot_y(30 * kDeg) * rot_x(20 * kDeg);
  const Eigen::Matrix3d m = q.toRotationMatrix();
  const Vec3 fwd = m.col(2);
  const double heading = std::atan2(fwd.x(), fwd.z());
  CHECK(heading == doctest::Approx(30 * kDeg).epsilon(1e-12));
  CHECK(yaw_of(q) == doctest::Approx(heading).epsilon(1e-12));
}

TEST_CASE("yaw_of range and degeneracy") {
  CHECK(yaw_of(rot_y(kPi)) == doctest::Approx(kPi));
  CHECK(yaw_of(rot_y(-kPi + 1e-9)) < 0.0);
  CHECK_THROWS_AS(yaw_of(rot_x(kPi / 2)), Error);
  try {
    yaw_of(rot_x(-kPi / 2));
    FAIL("expected undefined yaw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUndefinedYaw);
  }
  // Just outside the tolerance band yaw is defined.
  CHECK_NOTHROW(yaw_of(rot_x(kPi / 2 - 1e-3)));
}

TEST_CASE("yaw_only examples and properties") {
  CHECK(geodesic_angle(yaw_only(Quat::Identity()), Quat::Identity()) == 0.0);
  CHECK(geodesic_angle(yaw_only(rot_x(30 * kDeg)), Quat::Identity()) < 1e-15);

  const Quat y = yaw_only(rot_y(60 * kDeg) * rot_x(30 * kDeg));
  CHECK(yaw_of(y) == doctest::Approx(60 * kDeg).epsilon(1e-12));
  CHECK(y.x() == 0.0);
  CHECK(y.z() == 0.0);
  CHECK((y * kWorldUp.vector - kWorldUp.vector).norm() < 1e-15);

  std::mt19937_64 rng(3);
  for (int i = 0; i < 2000; ++i) {
    const Quat q = random_quat(rng);
    const Quat once = yaw_only(q);
    const Quat twice = yaw_only(once);
    CHECK(geodesic_angle(once, twice) < 1e-15);
    CHECK(std::abs(yaw_of(once) - yaw_of(q)) < 1e-12);
    // The remaining swing has no component about world-up.
    const Quat swing = once.conjugate() * q;
    CHECK(std::abs(swing.vec().dot(kWorldUp.vector)) < 1e-12);
  }
}

TEST_CASE("convert_handedness examples") {
  const Pose id = convert_handedness(Pose::identity());
  CHECK(id.translation == Vec3::Zero());
  CHECK(geodesic_angle(id.rotation, Quat::Identity()) == 0.0);
  CHECK(convert_handedness(Pose::from_translation({1, 2, 3})).translation == Vec3(1, 3, 2));
}

TEST_CASE("convert_handedness properties") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 2000; ++i) {
    const Pose p = random_pose(rng), q = random_pose(rng);
    const Vec3 v = random_vec(rng, 5.0);

    // Rotation equivalence: convert(q) * convert(v) == convert(q * v).
    const Vec3 lhs = convert_handedness(p.rotation) * convert_handedness(v);
    const Vec3 rhs = convert_handedness(Vec3(p.rotation * v));
    CHECK((lhs - rhs).norm() < 1e-9);

    // Involution, exact on the stored components.
    const Pose back = convert_handedness(convert_handedness(p));
    CHECK(back.translation == p.translation);
    CHECK(back.rotation.coeffs() == p.rotation.coeffs());

    // Distances survive.
    const double d0 = (p.translation - q.translation).norm();
    const double d1 = (convert_handedness(p).translation - convert_handedness(q).translation).norm();
    CHECK(std::abs(d0 - d1) < 1e-12);

    // Converted poses compose like the originals.
    const Pose c = convert_handedness(compose(p, q));
    const Pose d = compose(convert_handedness(p), convert_handedness(q));
    CHECK(pos_err(c, d) < 1e-9);
    CHECK(rot_err(c, d) < 1e-9);
  }
}

TEST_CASE("geodesic_angle examples") {
  std::mt19937_64 rng(5);
  const Quat q = random_quat(rng);
  CHECK(geodesic_angle(q, q) < 1e-15);
  const Quat neg(-q.w(), -q.x(), -q.y(), -q.z());
  CHECK(geodesic_angle(q, neg) < 1e-15);
  CHECK(geodesic_angle(Quat::Identity(), rot_z(kPi / 2)) == doctest::Approx(kPi / 2).epsilon(1e-14));
  CHECK(geodesic_angle(Quat::Identity(), rot_z(kPi)) == doctest::Approx(kPi).epsilon(1e-14));
  for (int i = 0; i < 500; ++i) {
    const double a = geodesic_angle(random_quat(rng), random_quat(rng));
    CHECK(a >= 0.0);
    CHECK(a <= kPi);
  }
}

TEST_CASE("wrap_angle range") {
  CHECK(wrap_angle(kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(-kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(3 * kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(2 * kPi + 0.25) == doctest::Approx(0.25));
  CHECK(wrap_angle(-0.25) == doctest::Approx(-0.25));
}

TEST_CASE("axes are unit and world-up is the yaw axis") {
  for (const Axis* a : {&kWorldUp, &kForward, &kRight}) CHECK(a->vector.norm() == 1.0);
  CHECK(kWorldUp.label == Axis::Label::kWorldUp);
  CHECK(yaw_rotation(0.3).vec().normalized() == kWorldUp.vector);
}
