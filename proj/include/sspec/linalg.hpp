#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace sspec {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace linalg {

/// a * b through the active SIMD kernel table.
Matrix multiply(const Matrix& a, const Matrix& b);

/// Largest singular value.
double op_norm(const Matrix& m);

/// Singular values, descending.
Vector singular_values(const Matrix& m);

/// Relative Frobenius distance ||a - b|| / max(||b||, tiny).
double relative_error(const Matrix& a, const Matrix& b);

/// Orthonormal basis for the column span of m (numerical rank at rtol).
Matrix orthonormal_basis(const Matrix& m, double rtol = 1e-12);

/// Largest principal angle between the column spans of two orthonormal
/// bases. Returns pi/2 when the dimensions differ.
double principal_angle(const Matrix& u, const Matrix& v);

/// Q factor of the Householder QR of m (thin, same shape as m).
Matrix orthonormal_factor(const Matrix& m);

/// Deterministic Haar-like random orthogonal d x d matrix.
Matrix random_orthogonal(int d, std::uint64_t seed);

/// Product of matrices kept as (normalized matrix, log scale) so the
/// top singular value of very long products never overflows.
class LogScaledProduct {
 public:
  explicit LogScaledProduct(Matrix start);

  /// this <- m * this
  void left_multiply(const Matrix& m);

  /// log of the largest singular value of the accumulated product; -inf if zero.
  double log_norm() const;

  const Matrix& normalized() const { return m_; }
  double log_scale() const { return log_scale_; }

 private:
  void renormalize();

  Matrix m_;
  double log_scale_ = 0.0;
};

/// Least-squares slope of y against x = 0, 1, ..., y.size() - 1.
double regression_slope(const std::vector<double>& y);

}  // namespace linalg
}  // namespace sspec
