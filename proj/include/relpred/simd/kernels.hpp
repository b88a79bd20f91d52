#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

// Dense double-precision vector kernels used by the embedding trainer and
// similarity queries. The scalar implementation is the reference; SIMD
// variants must agree with it to within accumulated rounding (see
// tests/test_kernels.cpp).

namespace relpred::simd {

enum class Isa { kScalar, kAvx2, kNeon };

struct KernelTable {
  Isa isa;
  // sum_i x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // y[i] *= a
  void (*scale)(double a, double* y, std::size_t n);
};

std::string_view to_string(Isa isa);

// True when the variant is compiled in and the running CPU supports it.
bool supported(Isa isa);
std::vector<Isa> supported_isas();

const KernelTable& table_for(Isa isa);

// The table selected for this process. Picks the widest supported ISA
// unless RELPRED_SIMD=scalar|avx2|neon is set in the environment.
const KernelTable& active();

// Overrides the active table for the rest of the process (tests, CLI flag).
void set_active(Isa isa);

inline double dot(std::span<const double> x, std::span<const double> y) {
  return active().dot(x.data(), y.data(), x.size());
}
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  active().axpy(a, x.data(), y.data(), x.size());
}
inline void scale(double a, std::span<double> y) { active().scale(a, y.data(), y.size()); }

namespace detail {
extern const KernelTable kScalarTable;
#if defined(RELPRED_BUILD_AVX2)
extern const KernelTable kAvx2Table;
#endif
#if defined(RELPRED_BUILD_NEON)
extern const KernelTable kNeonTable;
#endif
}  // namespace detail

}  // namespace relpred::simd
