#include <cmath>

#include "curvpose/simd/kernels.h"

namespace curvpose::simd::scalar {
namespace {

inline float prewitt_channel(const float* c, std::ptrdiff_t s, float& gy) {
  const float right = (c[-s + 1] + c[1]) + c[s + 1];
  const float left = (c[-s - 1] + c[-1]) + c[s - 1];
  const float bottom = (c[s - 1] + c[s]) + c[s + 1];
  const float top = (c[-s - 1] + c[-s]) + c[-s + 1];
  gy = (bottom - top) * kPrewittScale;
  return (right - left) * kPrewittScale;
}

}  // namespace

WeightedSum weighted_sum(const float* values, const float* weights, std::size_t n) {
  double w[4] = {0.0, 0.0, 0.0, 0.0};
  double m[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    const double v = values[i];
    w[i & 3] = w[i & 3] + v * static_cast<double>(weights[i]);
    m[i & 3] = m[i & 3] + v;
  }
  return {(w[0] + w[1]) + (w[2] + w[3]), (m[0] + m[1]) + (m[2] + m[3])};
}

void prewitt_magnitude(const float* nx, const float* ny, const float* nz, std::ptrdiff_t stride,
                       float* out, std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) {
    float gy0, gy1, gy2;
    const float gx0 = prewitt_channel(nx + i, stride, gy0);
    const float gx1 = prewitt_channel(ny + i, stride, gy1);
    const float gx2 = prewitt_channel(nz + i, stride, gy2);
    float sum = gx0 * gx0;
    sum = sum + gy0 * gy0;
    sum = sum + gx1 * gx1;
    sum = sum + gy1 * gy1;
    sum = sum + gx2 * gx2;
    sum = sum + gy2 * gy2;
    out[i] = std::sqrt(sum);
  }
}

}  // namespace curvpose::simd::scalar
