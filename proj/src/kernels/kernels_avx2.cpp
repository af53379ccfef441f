// Compiled with -mavx2 only; never called unless CPUID reports AVX2.
#include "sspec/kernels.hpp"

#if defined(__x86_64__) && defined(__AVX2__)

#include <immintrin.h>

#include <algorithm>
#include <cmath>

namespace sspec::kernels {
namespace {

void gemm_acc(std::size_t m, std::size_t n, std::size_t k, const double* a,
              std::size_t lda, const double* b, std::size_t ldb, double* c,
              std::size_t ldc) {
  const std::size_t m4 = m & ~std::size_t{3};
  for (std::size_t j = 0; j < n; ++j) {
    double* cj = c + j * ldc;
    for (std::size_t p = 0; p < k; ++p) {
      const double bpj = b[p + j * ldb];
      const __m256d vb = _mm256_set1_pd(bpj);
      const double* ap = a + p * lda;
      std::size_t i = 0;
      for (; i < m4; i += 4) {
        // mul then add, matching the scalar rounding exactly
        const __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(ap + i), vb);
        _mm256_storeu_pd(cj + i, _mm256_add_pd(_mm256_loadu_pd(cj + i), prod));
      }
      for (; i < m; ++i) cj[i] = cj[i] + ap[i] * bpj;
    }
  }
}

double hsum(__m256d v) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, v);
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

double sum(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

double dot(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

double max_abs(const double* x, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_max_pd(acc, _mm256_andnot_pd(sign, _mm256_loadu_pd(x + i)));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double m = std::max(std::max(lanes[0], lanes[1]), std::max(lanes[2], lanes[3]));
  for (; i < n; ++i) m = std::max(m, std::fabs(x[i]));
  return m;
}

void max_tilted(double* dst, const double* src, double slope, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(slope);
  const __m256d step = _mm256_set1_pd(4.0);
  __m256d idx = _mm256_setr_pd(0.0, 1.0, 2.0, 3.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_add_pd(_mm256_loadu_pd(src + i), _mm256_mul_pd(vs, idx));
    const __m256d d = _mm256_loadu_pd(dst + i);
    // select v where v > d, as in the scalar version
    const __m256d gt = _mm256_cmp_pd(v, d, _CMP_GT_OQ);
    _mm256_storeu_pd(dst + i, _mm256_blendv_pd(d, v, gt));
    idx = _mm256_add_pd(idx, step);
  }
  for (; i < n; ++i) {
    const double v = src[i] + slope * static_cast<double>(i);
    dst[i] = v > dst[i] ? v : dst[i];
  }
}

void scale(double* x, double alpha, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), va));
  for (; i < n; ++i) x[i] *= alpha;
}

}  // namespace

const KernelTable& avx2_table_impl() {
  static const KernelTable table{"avx2", gemm_acc, sum, dot, max_abs, max_tilted, scale};
  return table;
}

}  // namespace sspec::kernels

#endif
