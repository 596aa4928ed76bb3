#include <arm_neon.h>

#include <cmath>

#include "coloc/kernels/kernels.hpp"

namespace coloc::kernels::neon {

namespace {

double sum(const double* a, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(a + i));
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += a[i];
  return s;
}

double sum_squared_distance(const double* ax, const double* ay, const double* az,
                            const double* bx, const double* by, const double* bz,
                            std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t dx = vsubq_f64(vld1q_f64(ax + i), vld1q_f64(bx + i));
    const float64x2_t dy = vsubq_f64(vld1q_f64(ay + i), vld1q_f64(by + i));
    const float64x2_t dz = vsubq_f64(vld1q_f64(az + i), vld1q_f64(bz + i));
    acc = vfmaq_f64(acc, dx, dx);
    acc = vfmaq_f64(acc, dy, dy);
    acc = vfmaq_f64(acc, dz, dz);
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) {
    const double dx = ax[i] - bx[i];
    const double dy = ay[i] - by[i];
    const double dz = az[i] - bz[i];
    s += dx * dx + dy * dy + dz * dz;
  }
  return s;
}

CenteredMoments centered_moments(const double* a, const double* b, std::size_t n,
                                 double mean_a, double mean_b) {
  const float64x2_t ma = vdupq_n_f64(mean_a);
  const float64x2_t mb = vdupq_n_f64(mean_b);
  float64x2_t cross = vdupq_n_f64(0.0);
  float64x2_t va = vdupq_n_f64(0.0);
  float64x2_t vb = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t da = vsubq_f64(vld1q_f64(a + i), ma);
    const float64x2_t db = vsubq_f64(vld1q_f64(b + i), mb);
    cross = vfmaq_f64(cross, da, db);
    va = vfmaq_f64(va, da, da);
    vb = vfmaq_f64(vb, db, db);
  }
  CenteredMoments m{vaddvq_f64(cross), vaddvq_f64(va), vaddvq_f64(vb)};
  for (; i < n; ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    m.cross += da * db;
    m.var_a += da * da;
    m.var_b += db * db;
  }
  return m;
}

void step_lengths(const double* x, const double* y, const double* z, std::size_t n,
                  double* out) {
  if (n < 2) return;
  const std::size_t steps = n - 1;
  std::size_t i = 0;
  for (; i + 2 <= steps; i += 2) {
    const float64x2_t dx = vsubq_f64(vld1q_f64(x + i + 1), vld1q_f64(x + i));
    const float64x2_t dy = vsubq_f64(vld1q_f64(y + i + 1), vld1q_f64(y + i));
    const float64x2_t dz = vsubq_f64(vld1q_f64(z + i + 1), vld1q_f64(z + i));
    float64x2_t sq = vmulq_f64(dx, dx);
    sq = vfmaq_f64(sq, dy, dy);
    sq = vfmaq_f64(sq, dz, dz);
    vst1q_f64(out + i, vsqrtq_f64(sq));
  }
  for (; i < steps; ++i) {
    const double dx = x[i + 1] - x[i];
    const double dy = y[i + 1] - y[i];
    const double dz = z[i + 1] - z[i];
    out[i] = std::sqrt(dx * dx + dy * dy + dz * dz);
  }
}

}  // namespace

const KernelTable kTable{Isa::kNeon, &sum, &sum_squared_distance, &centered_moments,
                         &step_lengths};

}  // namespace coloc::kernels::neon
