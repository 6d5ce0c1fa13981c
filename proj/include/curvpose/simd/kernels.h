#pragma once

// Data-parallel inner loops of the renderer and the cost function.
//
// Every kernel has a scalar reference implementation and SIMD variants that are
// selected at runtime. All variants produce bit-identical results: reductions use
// a fixed 4-lane accumulation order, and no variant contracts multiply-adds.

#include <cstddef>
#include <vector>

namespace curvpose::simd {

enum class Isa { kScalar, kAvx2, kNeon };

const char* isa_name(Isa isa);

// Variants compiled in and supported by this CPU, scalar first.
std::vector<Isa> available_isas();
Isa best_isa();
Isa active_isa();
// Throws kInvalidArgument when the variant is unavailable. The initial choice is
// best_isa(), or the CURVPOSE_ISA environment variable (scalar|avx2|neon).
void set_active_isa(Isa isa);

struct WeightedSum {
  double weighted = 0.0;  // sum of values[i] * weights[i]
  double mass = 0.0;      // sum of values[i]
};

// Lane k accumulates the elements with i % 4 == k in increasing order; the
// result is (lane0 + lane1) + (lane2 + lane3). Products are formed in double.
WeightedSum weighted_sum(const float* values, const float* weights, std::size_t n);

// 2-norm of the six Prewitt responses (x and y, three normal channels), each
// kernel scaled by 1/6, for `count` consecutive pixels of one row. The channel
// pointers address the first output pixel inside a zero-padded buffer with row
// stride `stride`; the neighbors at +-1 and +-stride must be readable.
void prewitt_magnitude(const float* nx, const float* ny, const float* nz, std::ptrdiff_t stride,
                       float* out, std::size_t count);

inline constexpr float kPrewittScale = 1.0f / 6.0f;

namespace scalar {
WeightedSum weighted_sum(const float* values, const float* weights, std::size_t n);
void prewitt_magnitude(const float* nx, const float* ny, const float* nz, std::ptrdiff_t stride,
                       float* out, std::size_t count);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
WeightedSum weighted_sum(const float* values, const float* weights, std::size_t n);
void prewitt_magnitude(const float* nx, const float* ny, const float* nz, std::ptrdiff_t stride,
                       float* out, std::size_t count);
}  // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
WeightedSum weighted_sum(const float* values, const float* weights, std::size_t n);
void prewitt_magnitude(const float* nx, const float* ny, const float* nz, std::ptrdiff_t stride,
                       float* out, std::size_t count);
}  // namespace neon
#endif

}  // namespace curvpose::simd
