#include <atomic>
#include <cstdlib>
#include <string>

#include "curvpose/errors.h"
#include "curvpose/simd/kernels.h"

namespace curvpose::simd {
namespace {

using WeightedSumFn = WeightedSum (*)(const float*, const float*, std::size_t);
using PrewittFn = void (*)(const float*, const float*, const float*, std::ptrdiff_t, float*,
                           std::size_t);

struct Table {
  Isa isa;
  WeightedSumFn weighted_sum;
  PrewittFn prewitt;
};

Table table_for(Isa isa) {
  switch (isa) {
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::kAvx2: return {isa, &avx2::weighted_sum, &avx2::prewitt_magnitude};
#endif
#if defined(__aarch64__)
    case Isa::kNeon: return {isa, &neon::weighted_sum, &neon::prewitt_magnitude};
#endif
    default: return {Isa::kScalar, &scalar::weighted_sum, &scalar::prewitt_magnitude};
  }
}

bool supported(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return true;
    case Isa::kAvx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::kNeon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa initial_isa() {
  if (const char* env = std::getenv("CURVPOSE_ISA")) {
    const std::string name(env);
    for (Isa isa : available_isas()) {
      if (name == isa_name(isa)) return isa;
    }
  }
  return best_isa();
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
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
  std::vector<Isa> out;
  for (Isa isa : {Isa::kScalar, Isa::kAvx2, Isa::kNeon}) {
    if (supported(isa)) out.push_back(isa);
  }
  return out;
}

Isa best_isa() { return available_isas().back(); }

Isa active_isa() { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (!supported(isa)) {
    throw Error(ErrorCode::kInvalidArgument, std::string("SIMD variant unavailable: ") + isa_name(isa));
  }
  active().store(isa, std::memory_order_relaxed);
}

WeightedSum weighted_sum(const float* values, const float* weights, std::size_t n) {
  return table_for(active_isa()).weighted_sum(values, weights, n);
}

void prewitt_magnitude(const float* nx, const float* ny, const float* nz, std::ptrdiff_t stride,
                       float* out, std::size_t count) {
  table_for(active_isa()).prewitt(nx, ny, nz, stride, out, count);
}

}  // namespace curvpose::simd
