#pragma once

// Data-parallel inner loops used by the metric and latency code.
//
// Every kernel has a scalar reference implementation and optional vector
// variants. The active variant is chosen once at startup from CPU features
// and can be pinned with COLOC_SIMD=scalar|avx2|neon. Vector variants
// reassociate sums, so results match the scalar path to rounding, not bit
// for bit.

#include <cstddef>
#include <span>
#include <vector>

namespace coloc::kernels {

enum class Isa { kScalar, kAvx2, kNeon };

const char* isa_name(Isa isa);

struct CenteredMoments {
  double cross = 0.0;  // sum (a - ma)(b - mb)
  double var_a = 0.0;  // sum (a - ma)^2
  double var_b = 0.0;  // sum (b - mb)^2
};

struct KernelTable {
  Isa isa;
  double (*sum)(const double* a, std::size_t n);
  // sum_i |a_i - b_i|^2 over SoA 3-vectors.
  double (*sum_squared_distance)(const double* ax, const double* ay, const double* az,
                                 const double* bx, const double* by, const double* bz,
                                 std::size_t n);
  CenteredMoments (*centered_moments)(const double* a, const double* b, std::size_t n,
                                      double mean_a, double mean_b);
  // out[i] = |p_{i+1} - p_i|, writes n - 1 values.
  void (*step_lengths)(const double* x, const double* y, const double* z, std::size_t n,
                       double* out);
};

// Variants compiled into this binary and supported by the running CPU.
std::vector<Isa> available_isas();
const KernelTable& table(Isa isa);
const KernelTable& active();

namespace scalar {
extern const KernelTable kTable;
}
#if defined(COLOC_HAVE_AVX2)
namespace avx2 {
extern const KernelTable kTable;
}
#endif
#if defined(COLOC_HAVE_NEON)
namespace neon {
extern const KernelTable kTable;
}
#endif

// Span conveniences over the active table.
double sum(std::span<const double> a);
double sum_squared_distance(std::span<const double> ax, std::span<const double> ay,
                            std::span<const double> az, std::span<const double> bx,
                            std::span<const double> by, std::span<const double> bz);
CenteredMoments centered_moments(std::span<const double> a, std::span<const double> b,
                                 double mean_a, double mean_b);
std::vector<double> step_lengths(std::span<const double> x, std::span<const double> y,
                                 std::span<const double> z);

}  // namespace coloc::kernels
