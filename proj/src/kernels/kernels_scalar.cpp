#include "sspec/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace sspec::kernels {
namespace {

void gemm_acc(std::size_t m, std::size_t n, std::size_t k, const double* a,
              std::size_t lda, const double* b, std::size_t ldb, double* c,
              std::size_t ldc) {
  for (std::size_t j = 0; j < n; ++j) {
    double* cj = c + j * ldc;
    for (std::size_t p = 0; p < k; ++p) {
      const double bpj = b[p + j * ldb];
      const double* ap = a + p * lda;
      for (std::size_t i = 0; i < m; ++i) cj[i] = cj[i] + ap[i] * bpj;
    }
  }
}

double sum(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i];
  return s;
}

double dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

double max_abs(const double* x, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(x[i]));
  return m;
}

void max_tilted(double* dst, const double* src, double slope, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double v = src[i] + slope * static_cast<double>(i);
    dst[i] = v > dst[i] ? v : dst[i];
  }
}

void scale(double* x, double alpha, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{"scalar", gemm_acc, sum, dot, max_abs, max_tilted, scale};
  return table;
}

}  // namespace sspec::kernels
