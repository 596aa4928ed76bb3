#include "coloc/calib.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

#include "coloc/error.hpp"

namespace coloc::calib {

std::vector<SamplePair> associate(const Trajectory& a, const Trajectory& b, double max_dt) {
  if (!(max_dt > 0.0)) throw Error(ErrorCode::kInvalidArgument, "associate: max_dt must be > 0");
  if (a.empty() || b.empty()) throw Error(ErrorCode::kInvalidArgument, "associate: empty trajectory");

  struct Candidate {
    double dt;
    std::size_t i;
    std::size_t j;
  };
  std::vector<Candidate> candidates;
  const auto& bs = b.samples;
  std::size_t lo = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i].t;
    while (lo < bs.size() && bs[lo].t < t - max_dt) ++lo;
    for (std::size_t j = lo; j < bs.size() && bs[j].t <= t + max_dt; ++j) {
      const double dt = std::abs(bs[j].t - t);
      if (dt <= max_dt) candidates.push_back({dt, i, j});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
    return std::tie(x.dt, x.i, x.j) < std::tie(y.dt, y.i, y.j);
  });

  std::vector<char> used_a(a.size(), 0), used_b(b.size(), 0);
  std::vector<SamplePair> pairs;
  for (const auto& c : candidates) {
    if (used_a[c.i] || used_b[c.j]) continue;
    used_a[c.i] = used_b[c.j] = 1;
    pairs.push_back({c.i, c.j});
  }
  std::sort(pairs.begin(), pairs.end(),
            [](const SamplePair& x, const SamplePair& y) { return x.index_a < y.index_a; });
  return pairs;
}

Pose umeyama_align(std::span<const Vec3> points_a, std::span<const Vec3> points_b) {
  if (points_a.size() != points_b.size()) {
    throw Error(ErrorCode::kInvalidArgument, "umeyama_align: point lists differ in length");
  }
  const std::size_t n = points_a.size();
  if (n < 3) throw Error(ErrorCode::kDegenerateGeometry, "umeyama_align: need at least 3 points");

  Vec3 mean_a = Vec3::Zero(), mean_b = Vec3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    mean_a += points_a[i];
    mean_b += points_b[i];
  }
  mean_a /= static_cast<double>(n);
  mean_b /= static_cast<double>(n);

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    cov += (points_b[i] - mean_b) * (points_a[i] - mean_a).transpose();
  }
  cov /= static_cast<double>(n);

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sv = svd.singularValues();
  // A rotation is pinned down by rank >= 2; planar point sets are fine.
  if (!(sv(0) > 0.0) || sv(1) < 1e-12 * sv(0)) {
    throw Error(ErrorCode::kDegenerateGeometry, "umeyama_align: collinear or coincident points");
  }
  Eigen::Matrix3d s = Eigen::Matrix3d::Identity();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) s(2, 2) = -1.0;
  const Eigen::Matrix3d r = svd.matrixU() * s * svd.matrixV().transpose();

  Pose out;
  out.rotation = Quat(r).normalized();
  out.translation = mean_b - out.rotation * mean_a;
  return out;
}

Extrinsics estimate_extrinsics(std::span<const PosePair> pairs, const CalibConfig& cfg) {
  if (pairs.size() < std::max<std::size_t>(cfg.min_pairs, 1)) {
    throw Error(ErrorCode::kInsufficientData,
                "estimate_extrinsics: " + std::to_string(pairs.size()) + " pairs, need " +
                    std::to_string(cfg.min_pairs));
  }
  const double n = static_cast<double>(pairs.size());

  Vec3 t_sum = Vec3::Zero();
  Eigen::Vector4d q_sum = Eigen::Vector4d::Zero();
  Quat reference;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Pose sample = compose(inverse(pairs[i].mocap), pairs[i].eye);
    t_sum += sample.translation;
    if (i == 0) reference = sample.rotation;
    q_sum += align_sign(sample.rotation, reference).coeffs();
  }
  const double mean_norm = q_sum.norm() / n;
  if (!(mean_norm >= 0.5)) {
    throw Error(ErrorCode::kInconsistentData,
                "estimate_extrinsics: per-sample rotations disagree (mean quaternion norm " +
                    std::to_string(mean_norm) + ")");
  }

  Extrinsics out;
  out.transform.translation = t_sum / n;
  out.transform.rotation = Quat(q_sum(3), q_sum(0), q_sum(1), q_sum(2)).normalized();
  out.sample_count = pairs.size();

  double pos_sq = 0.0, rot_sq = 0.0;
  for (const auto& p : pairs) {
    const Pose predicted = compose(p.mocap, out.transform);
    pos_sq += (predicted.translation - p.eye.translation).squaredNorm();
    const double angle = geodesic_angle(predicted.rotation, p.eye.rotation);
    rot_sq += angle * angle;
  }
  out.rms_position_residual = std::sqrt(pos_sq / n);
  out.rms_rotation_residual = std::sqrt(rot_sq / n);
  return out;
}

double objective(std::span<const PosePair> pairs, const Pose& transform) {
  double total = 0.0;
  for (const auto& p : pairs) {
    const Pose predicted = compose(p.mocap, transform);
    total += (predicted.translation - p.eye.translation).squaredNorm();
    total += (predicted.rotation.toRotationMatrix() - p.eye.rotation.toRotationMatrix())
                 .squaredNorm();
  }
  return total;
}

namespace {

Vec3 rotation_log(const Quat& q_in) {
  Quat q = q_in;
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const double n = q.vec().norm();
  if (n < 1e-12) return 2.0 * q.vec();
  return (2.0 * std::atan2(n, q.w()) / n) * q.vec();
}

Quat rotation_exp(const Vec3& v) {
  const double angle = v.norm();
  if (angle < 1e-15) return Quat(1.0, 0.5 * v.x(), 0.5 * v.y(), 0.5 * v.z()).normalized();
  return Quat(Eigen::AngleAxisd(angle, v / angle));
}

using Vec12 = Eigen::Matrix<double, 12, 1>;

// Residuals of frame * device_k against mocap_k * extrinsics.
void joint_residuals(std::span<const PosePair> pairs, std::span<const Pose> device, const Pose& frame,
                     const Pose& extrinsics, Eigen::VectorXd& r) {
  r.resize(static_cast<Eigen::Index>(6 * pairs.size()));
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const Pose a = compose(frame, device[k]);
    const Pose b = compose(pairs[k].mocap, extrinsics);
    const auto i = static_cast<Eigen::Index>(6 * k);
    r.segment<3>(i) = a.translation - b.translation;
    r.segment<3>(i + 3) = rotation_log(b.rotation.conjugate() * a.rotation);
  }
}

std::pair<Pose, Pose> perturb(const Pose& frame, const Pose& extrinsics, const Vec12& d) {
  const Pose left{rotation_exp(d.segment<3>(0)), d.segment<3>(3)};
  const Pose right{rotation_exp(d.segment<3>(6)), d.segment<3>(9)};
  return {compose(left, frame), compose(extrinsics, right)};
}

// Gauss-Newton over the frame registration and the extrinsics together,
// with a forward-difference Jacobian. Returns the refined frame.
Pose refine_jointly(std::span<const PosePair> pairs, std::span<const Pose> device, Pose frame, Pose extrinsics) {
  constexpr int kMaxIterations = 30;
  constexpr double kStep = 1e-7;
  Eigen::VectorXd r, r_step;
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(6 * pairs.size()), 12);
  joint_residuals(pairs, device, frame, extrinsics, r);
  double cost = r.squaredNorm();
  for (int it = 0; it < kMaxIterations; ++it) {
    for (int p = 0; p < 12; ++p) {
      Vec12 d = Vec12::Zero();
      d[p] = kStep;
      const auto [f, x] = perturb(frame, extrinsics, d);
      joint_residuals(pairs, device, f, x, r_step);
      jac.col(p) = (r_step - r) / kStep;
    }
    const Vec12 delta = (jac.transpose() * jac).ldlt().solve(-jac.transpose() * r);
    if (!delta.allFinite()) break;
    const auto [f, x] = perturb(frame, extrinsics, delta);
    joint_residuals(pairs, device, f, x, r_step);
    const double next_cost = r_step.squaredNorm();
    if (!(next_cost < cost)) break;
    frame = f, extrinsics = x, r = r_step, cost = next_cost;
    if (delta.norm() < 1e-13) break;
  }
  return frame;
}

}  // namespace

TrajectoryCalibration calibrate(const Trajectory& mocap, const Trajectory& eye,
                                const TrajectoryCalibConfig& cfg) {
  Trajectory shifted = mocap;
  for (auto& s : shifted.samples) s.t -= cfg.mocap_delay;

  const auto assoc = associate(shifted, eye, cfg.calib.max_dt);
  if (assoc.size() < cfg.calib.min_pairs) {
    throw Error(ErrorCode::kInsufficientData,
                "calibrate: " + std::to_string(assoc.size()) + " associated pairs, need " +
                    std::to_string(cfg.calib.min_pairs));
  }

  TrajectoryCalibration out;
  out.pair_count = assoc.size();

  std::vector<PosePair> pairs(assoc.size());
  std::vector<Vec3> eye_points(assoc.size()), world_points(assoc.size());
  for (std::size_t k = 0; k < assoc.size(); ++k) {
    pairs[k].mocap = shifted[assoc[k].index_a].pose;
    eye_points[k] = eye[assoc[k].index_b].pose.translation;
  }

  auto apply_frame = [&](const Pose& frame) {
    for (std::size_t k = 0; k < assoc.size(); ++k) {
      pairs[k].eye = compose(frame, eye[assoc[k].index_b].pose);
    }
  };

  if (!cfg.prealign) {
    apply_frame(Pose::identity());
    out.extrinsics = estimate_extrinsics(pairs, cfg.calib);
    out.iterations = 1;
    return out;
  }

  // First pass registers eye positions directly onto mocap body positions,
  // which is off by the (unknown) lever arm. Later passes register onto the
  // eye positions predicted by the current extrinsics.
  for (std::size_t k = 0; k < assoc.size(); ++k) world_points[k] = pairs[k].mocap.translation;
  Pose frame = umeyama_align(eye_points, world_points);
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    apply_frame(frame);
    out.extrinsics = estimate_extrinsics(pairs, cfg.calib);
    out.iterations = it;
    for (std::size_t k = 0; k < assoc.size(); ++k) {
      world_points[k] = compose(pairs[k].mocap, out.extrinsics.transform).translation;
    }
    const Pose next = umeyama_align(eye_points, world_points);
    const double change = (next.translation - frame.translation).norm() +
                          geodesic_angle(next.rotation, frame.rotation);
    frame = next;
    if (change < 1e-12) break;
  }
  // Alternation converges only linearly when the lever arm and the frame
  // registration are strongly coupled; finish with a joint Gauss-Newton solve.
  apply_frame(frame);
  out.extrinsics = estimate_extrinsics(pairs, cfg.calib);
  std::vector<Pose> device(assoc.size());
  for (std::size_t k = 0; k < assoc.size(); ++k) device[k] = eye[assoc[k].index_b].pose;
  frame = refine_jointly(pairs, device, frame, out.extrinsics.transform);
  apply_frame(frame);
  out.extrinsics = estimate_extrinsics(pairs, cfg.calib);
  out.eye_frame_to_world = frame;
  return out;
}

}  // namespace coloc::calib
