#include <atomic>
#include <cstdlib>
#include <string>

#include "relpred/error.hpp"
#include "relpred/simd/kernels.hpp"

namespace relpred::simd {
namespace {

bool cpu_has(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(RELPRED_BUILD_AVX2)
      __builtin_cpu_init();
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::kNeon:
#if defined(RELPRED_BUILD_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa pick_default() {
  if (const char* env = std::getenv("RELPRED_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return Isa::kScalar;
    if (want == "avx2" && cpu_has(Isa::kAvx2)) return Isa::kAvx2;
    if (want == "neon" && cpu_has(Isa::kNeon)) return Isa::kNeon;
  }
  if (cpu_has(Isa::kAvx2)) return Isa::kAvx2;
  if (cpu_has(Isa::kNeon)) return Isa::kNeon;
  return Isa::kScalar;
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{&table_for(pick_default())};
  return slot;
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
    case Isa::kNeon: return "neon";
  }
  return "unknown";
}

bool supported(Isa isa) { return cpu_has(isa); }

std::vector<Isa> supported_isas() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::kScalar, Isa::kAvx2, Isa::kNeon}) {
    if (cpu_has(isa)) out.push_back(isa);
  }
  return out;
}

const KernelTable& table_for(Isa isa) {
  if (!cpu_has(isa)) fail(ErrorKind::kInvalidArgument, "SIMD variant not available: " + std::string(to_string(isa)));
  switch (isa) {
#if defined(RELPRED_BUILD_AVX2)
    case Isa::kAvx2: return detail::kAvx2Table;
#endif
#if defined(RELPRED_BUILD_NEON)
    case Isa::kNeon: return detail::kNeonTable;
#endif
    default: return detail::kScalarTable;
  }
}

const KernelTable& active() { return *active_slot().load(std::memory_order_acquire); }

void set_active(Isa isa) { active_slot().store(&table_for(isa), std::memory_order_release); }

}  // namespace relpred::simd
