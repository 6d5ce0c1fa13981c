#include <immintrin.h>

#include "curvpose/simd/kernels.h"

namespace curvpose::simd::avx2 {
namespace {

inline __m256 load(const float* p) { return _mm256_loadu_ps(p); }

inline __m256 prewitt_channel(const float* c, std::ptrdiff_t s, __m256 scale, __m256& gy) {
  const __m256 right = _mm256_add_ps(_mm256_add_ps(load(c - s + 1), load(c + 1)), load(c + s + 1));
  const __m256 left = _mm256_add_ps(_mm256_add_ps(load(c - s - 1), load(c - 1)), load(c + s - 1));
  const __m256 bottom = _mm256_add_ps(_mm256_add_ps(load(c + s - 1), load(c + s)), load(c + s + 1));
  const __m256 top = _mm256_add_ps(_mm256_add_ps(load(c - s - 1), load(c - s)), load(c - s + 1));
  gy = _mm256_mul_ps(_mm256_sub_ps(bottom, top), scale);
  return _mm256_mul_ps(_mm256_sub_ps(right, left), scale);
}

}  // namespace

WeightedSum weighted_sum(const float* values, const float* weights, std::size_t n) {
  __m256d acc_w = _mm256_setzero_pd();
  __m256d acc_m = _mm256_setzero_pd();
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d v = _mm256_cvtps_pd(_mm_loadu_ps(values + i));
    const __m256d w = _mm256_cvtps_pd(_mm_loadu_ps(weights + i));
    acc_w = _mm256_add_pd(acc_w, _mm256_mul_pd(v, w));
    acc_m = _mm256_add_pd(acc_m, v);
  }
  alignas(32) double lw[4];
  alignas(32) double lm[4];
  _mm256_store_pd(lw, acc_w);
  _mm256_store_pd(lm, acc_m);
  for (std::size_t i = n4; i < n; ++i) {
    const double v = values[i];
    lw[i & 3] = lw[i & 3] + v * static_cast<double>(weights[i]);
    lm[i & 3] = lm[i & 3] + v;
  }
  return {(lw[0] + lw[1]) + (lw[2] + lw[3]), (lm[0] + lm[1]) + (lm[2] + lm[3])};
}

void prewitt_magnitude(const float* nx, const float* ny, const float* nz, std::ptrdiff_t stride,
                       float* out, std::size_t count) {
  const __m256 scale = _mm256_set1_ps(kPrewittScale);
  const std::size_t n8 = count & ~std::size_t{7};
  for (std::size_t i = 0; i < n8; i += 8) {
    __m256 gy0, gy1, gy2;
    const __m256 gx0 = prewitt_channel(nx + i, stride, scale, gy0);
    const __m256 gx1 = prewitt_channel(ny + i, stride, scale, gy1);
    const __m256 gx2 = prewitt_channel(nz + i, stride, scale, gy2);
    __m256 sum = _mm256_mul_ps(gx0, gx0);
    sum = _mm256_add_ps(sum, _mm256_mul_ps(gy0, gy0));
    sum = _mm256_add_ps(sum, _mm256_mul_ps(gx1, gx1));
    sum = _mm256_add_ps(sum, _mm256_mul_ps(gy1, gy1));
    sum = _mm256_add_ps(sum, _mm256_mul_ps(gx2, gx2));
    sum = _mm256_add_ps(sum, _mm256_mul_ps(gy2, gy2));
    _mm256_storeu_ps(out + i, _mm256_sqrt_ps(sum));
  }
  if (n8 < count) scalar::prewitt_magnitude(nx + n8, ny + n8, nz + n8, stride, out + n8, count - n8);
}

}  // namespace curvpose::simd::avx2
