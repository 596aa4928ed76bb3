// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include <cmath>

#include "coloc/kernels/kernels.hpp"

namespace coloc::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double sum(const double* a, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(a + i));
    acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(a + i + 4));
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(a + i));
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i];
  return s;
}

double sum_squared_distance(const double* ax, const double* ay, const double* az,
                            const double* bx, const double* by, const double* bz,
                            std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(ax + i), _mm256_loadu_pd(bx + i));
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ay + i), _mm256_loadu_pd(by + i));
    const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(az + i), _mm256_loadu_pd(bz + i));
    acc = _mm256_fmadd_pd(dx, dx, acc);
    acc = _mm256_fmadd_pd(dy, dy, acc);
    acc = _mm256_fmadd_pd(dz, dz, acc);
  }
  double s = hsum(acc);
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
  const __m256d ma = _mm256_set1_pd(mean_a);
  const __m256d mb = _mm256_set1_pd(mean_b);
  __m256d cross = _mm256_setzero_pd();
  __m256d va = _mm256_setzero_pd();
  __m256d vb = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d da = _mm256_sub_pd(_mm256_loadu_pd(a + i), ma);
    const __m256d db = _mm256_sub_pd(_mm256_loadu_pd(b + i), mb);
    cross = _mm256_fmadd_pd(da, db, cross);
    va = _mm256_fmadd_pd(da, da, va);
    vb = _mm256_fmadd_pd(db, db, vb);
  }
  CenteredMoments m{hsum(cross), hsum(va), hsum(vb)};
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
  for (; i + 4 <= steps; i += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(x + i + 1), _mm256_loadu_pd(x + i));
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(y + i + 1), _mm256_loadu_pd(y + i));
    const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(z + i + 1), _mm256_loadu_pd(z + i));
    __m256d sq = _mm256_mul_pd(dx, dx);
    sq = _mm256_fmadd_pd(dy, dy, sq);
    sq = _mm256_fmadd_pd(dz, dz, sq);
    _mm256_storeu_pd(out + i, _mm256_sqrt_pd(sq));
  }
  for (; i < steps; ++i) {
    const double dx = x[i + 1] - x[i];
    const double dy = y[i + 1] - y[i];
    const double dz = z[i + 1] - z[i];
    out[i] = std::sqrt(dx * dx + dy * dy + dz * dz);
  }
}

}  // namespace

const KernelTable kTable{Isa::kAvx2, &sum, &sum_squared_distance, &centered_moments,
                         &step_lengths};

}  // namespace coloc::kernels::avx2
