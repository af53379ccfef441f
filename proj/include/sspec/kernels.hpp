#pragma once

#include <cstddef>
#include <string_view>

// Data-parallel inner loops. Each kernel has a scalar reference version and,
// on x86-64, an AVX2 version; the active table is chosen once at startup from
// CPUID and may be overridden with SSPEC_KERNELS=scalar|avx2.
//
// gemm and the elementwise kernels are bitwise identical across variants (same
// operation order, no FMA contraction). Reductions (sum, dot) reassociate and
// agree to rounding.

namespace sspec::kernels {

struct KernelTable {
  std::string_view name;

  /// C += A * B, all column-major. A is m x k (lda), B is k x n (ldb).
  void (*gemm_acc)(std::size_t m, std::size_t n, std::size_t k, const double* a,
                   std::size_t lda, const double* b, std::size_t ldb, double* c,
                   std::size_t ldc);
  double (*sum)(const double* x, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);
  double (*max_abs)(const double* x, std::size_t n);
  /// dst[i] = max(dst[i], src[i] + slope * i)
  void (*max_tilted)(double* dst, const double* src, double slope, std::size_t n);
  /// x[i] *= alpha
  void (*scale)(double* x, double alpha, std::size_t n);
};

const KernelTable& scalar_table();

/// nullptr when the CPU (or the build) lacks AVX2.
const KernelTable* avx2_table();

/// The table all library code dispatches through.
const KernelTable& active();

/// Switches the active table; returns false if `name` is unavailable.
bool select(std::string_view name);

}  // namespace sspec::kernels
