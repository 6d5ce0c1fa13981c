#include <arm_neon.h>

#include "curvpose/simd/kernels.h"

namespace curvpose::simd::neon {
namespace {

inline float32x4_t prewitt_channel(const float* c, std::ptrdiff_t s, float32x4_t scale,
                                   float32x4_t& gy) {
  const float32x4_t right = vaddq_f32(vaddq_f32(vld1q_f32(c - s + 1), vld1q_f32(c + 1)), vld1q_f32(c + s + 1));
  const float32x4_t left = vaddq_f32(vaddq_f32(vld1q_f32(c - s - 1), vld1q_f32(c - 1)), vld1q_f32(c + s - 1));
  const float32x4_t bottom = vaddq_f32(vaddq_f32(vld1q_f32(c + s - 1), vld1q_f32(c + s)), vld1q_f32(c + s + 1));
  const float32x4_t top = vaddq_f32(vaddq_f32(vld1q_f32(c - s - 1), vld1q_f32(c - s)), vld1q_f32(c - s + 1));
  gy = vmulq_f32(vsubq_f32(bottom, top), scale);
  return vmulq_f32(vsubq_f32(right, left), scale);
}

}  // namespace

WeightedSum weighted_sum(const float* values, const float* weights, std::size_t n) {
  // Two 2-lane registers stand in for the four reference lanes.
  float64x2_t w01 = vdupq_n_f64(0.0), w23 = vdupq_n_f64(0.0);
  float64x2_t m01 = vdupq_n_f64(0.0), m23 = vdupq_n_f64(0.0);
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    const float32x4_t v = vld1q_f32(values + i);
    const float32x4_t w = vld1q_f32(weights + i);
    const float64x2_t v01 = vcvt_f64_f32(vget_low_f32(v));
    const float64x2_t v23 = vcvt_high_f64_f32(v);
    w01 = vaddq_f64(w01, vmulq_f64(v01, vcvt_f64_f32(vget_low_f32(w))));
    w23 = vaddq_f64(w23, vmulq_f64(v23, vcvt_high_f64_f32(w)));
    m01 = vaddq_f64(m01, v01);
    m23 = vaddq_f64(m23, v23);
  }
  double lw[4] = {vgetq_lane_f64(w01, 0), vgetq_lane_f64(w01, 1), vgetq_lane_f64(w23, 0),
                  vgetq_lane_f64(w23, 1)};
  double lm[4] = {vgetq_lane_f64(m01, 0), vgetq_lane_f64(m01, 1), vgetq_lane_f64(m23, 0),
                  vgetq_lane_f64(m23, 1)};
  for (std::size_t i = n4; i < n; ++i) {
    const double v = values[i];
    lw[i & 3] = lw[i & 3] + v * static_cast<double>(weights[i]);
    lm[i & 3] = lm[i & 3] + v;
  }
  return {(lw[0] + lw[1]) + (lw[2] + lw[3]), (lm[0] + lm[1]) + (lm[2] + lm[3])};
}

void prewitt_magnitude(const float* nx, const float* ny, const float* nz, std::ptrdiff_t stride,
                       float* out, std::size_t count) {
  const float32x4_t scale = vdupq_n_f32(kPrewittScale);
  const std::size_t n4 = count & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    float32x4_t gy0, gy1, gy2;
    const float32x4_t gx0 = prewitt_channel(nx + i, stride, scale, gy0);
    const float32x4_t gx1 = prewitt_channel(ny + i, stride, scale, gy1);
    const float32x4_t gx2 = prewitt_channel(nz + i, stride, scale, gy2);
    float32x4_t sum = vmulq_f32(gx0, gx0);
    sum = vaddq_f32(sum, vmulq_f32(gy0, gy0));
    sum = vaddq_f32(sum, vmulq_f32(gx1, gx1));
    sum = vaddq_f32(sum, vmulq_f32(gy1, gy1));
    sum = vaddq_f32(sum, vmulq_f32(gx2, gx2));
    sum = vaddq_f32(sum, vmulq_f32(gy2, gy2));
    vst1q_f32(out + i, vsqrtq_f32(sum));
  }
  if (n4 < count) scalar::prewitt_magnitude(nx + n4, ny + n4, nz + n4, stride, out + n4, count - n4);
}

}  // namespace curvpose::simd::neon
