#include <cmath>

#include "coloc/kernels/kernels.hpp"

namespace coloc::kernels::scalar {

namespace {

double sum(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i];
  return s;
}

double sum_squared_distance(const double* ax, const double* ay, const double* az,
                            const double* bx, const double* by, const double* bz,
                            std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = ax[i] - bx[i];
    const double dy = ay[i] - by[i];
    const double dz = az[i] - bz[i];
    s += dx * dx + dy * dy + dz * dz;
  }
  return s;
}

CenteredMoments centered_moments(const double* a, const double* b, std::size_t n,
                                 double mean_a, double mean_b) {
  CenteredMoments m;
  for (std::size_t i = 0; i < n; ++i) {
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
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double dx = x[i + 1] - x[i];
    const double dy = y[i + 1] - y[i];
    const double dz = z[i + 1] - z[i];
    out[i] = std::sqrt(dx * dx + dy * dy + dz * dz);
  }
}

}  // namespace

const KernelTable kTable{Isa::kScalar, &sum, &sum_squared_distance, &centered_moments,
                         &step_lengths};

}  // namespace coloc::kernels::scalar
