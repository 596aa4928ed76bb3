#include <cstdlib>
#include <string_view>

#include "coloc/error.hpp"
#include "coloc/kernels/kernels.hpp"

namespace coloc::kernels {

namespace {

bool cpu_supports(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(COLOC_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::kNeon:
#if defined(COLOC_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& select() {
  if (const char* env = std::getenv("COLOC_SIMD")) {
    const std::string_view want(env);
    for (Isa isa : available_isas()) {
      if (want == isa_name(isa)) return table(isa);
    }
  }
  const auto isas = available_isas();
  return table(isas.back());
}

}  // namespace

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
    case Isa::kNeon: return "neon";
  }
  return "unknown";
}

std::vector<Isa> available_isas() {
  std::vector<Isa> out{Isa::kScalar};
  if (cpu_supports(Isa::kAvx2)) out.push_back(Isa::kAvx2);
  if (cpu_supports(Isa::kNeon)) out.push_back(Isa::kNeon);
  return out;
}

const KernelTable& table(Isa isa) {
  if (!cpu_supports(isa)) {
    throw Error(ErrorCode::kInvalidArgument, std::string("SIMD variant unavailable: ") + isa_name(isa));
  }
  switch (isa) {
#if defined(COLOC_HAVE_AVX2)
    case Isa::kAvx2: return avx2::kTable;
#endif
#if defined(COLOC_HAVE_NEON)
    case Isa::kNeon: return neon::kTable;
#endif
    default: return scalar::kTable;
  }
}

const KernelTable& active() {
  static const KernelTable& t = select();
  return t;
}

namespace {
void require_same(std::size_t a, std::size_t b) {
  if (a != b) throw Error(ErrorCode::kInvalidArgument, "kernel inputs differ in length");
}
}  // namespace

double sum(std::span<const double> a) { return active().sum(a.data(), a.size()); }

double sum_squared_distance(std::span<const double> ax, std::span<const double> ay,
                            std::span<const double> az, std::span<const double> bx,
                            std::span<const double> by, std::span<const double> bz) {
  const std::size_t n = ax.size();
  for (std::size_t m : {ay.size(), az.size(), bx.size(), by.size(), bz.size()}) require_same(n, m);
  return active().sum_squared_distance(ax.data(), ay.data(), az.data(), bx.data(), by.data(),
                                       bz.data(), n);
}

CenteredMoments centered_moments(std::span<const double> a, std::span<const double> b,
                                 double mean_a, double mean_b) {
  require_same(a.size(), b.size());
  return active().centered_moments(a.data(), b.data(), a.size(), mean_a, mean_b);
}

std::vector<double> step_lengths(std::span<const double> x, std::span<const double> y,
                                 std::span<const double> z) {
  require_same(x.size(), y.size());
  require_same(x.size(), z.size());
  if (x.size() < 2) return {};
  std::vector<double> out(x.size() - 1);
  active().step_lengths(x.data(), y.data(), z.data(), x.size(), out.data());
  return out;
}

}  // namespace coloc::kernels
