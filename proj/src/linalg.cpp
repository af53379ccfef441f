#include "sspec/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "sspec/kernels.hpp"

namespace sspec::linalg {

Matrix multiply(const Matrix& a, const Matrix& b) {
  Matrix c = Matrix::Zero(a.rows(), b.cols());
  if (a.size() == 0 || b.size() == 0) return c;
  kernels::active().gemm_acc(static_cast<std::size_t>(a.rows()), static_cast<std::size_t>(b.cols()),
                             static_cast<std::size_t>(a.cols()), a.data(),
                             static_cast<std::size_t>(a.rows()), b.data(),
                             static_cast<std::size_t>(b.rows()), c.data(),
                             static_cast<std::size_t>(c.rows()));
  return c;
}

Vector singular_values(const Matrix& m) {
  if (m.size() == 0) return Vector();
  if (std::max(m.rows(), m.cols()) <= 16) {
    return Eigen::JacobiSVD<Matrix>(m).singularValues();
  }
  return Eigen::BDCSVD<Matrix>(m).singularValues();
}

double op_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1 || m.cols() == 1) return m.norm();
  return singular_values(m)(0);
}

double relative_error(const Matrix& a, const Matrix& b) {
  const double denom = std::max(b.norm(), std::numeric_limits<double>::min());
  return (a - b).norm() / denom;
}

Matrix orthonormal_basis(const Matrix& m, double rtol) {
  if (m.cols() == 0) return Matrix(m.rows(), 0);
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU);
  const Vector& s = svd.singularValues();
  Eigen::Index rank = 0;
  const double cut = s.size() > 0 ? s(0) * rtol : 0.0;
  while (rank < s.size() && s(rank) > cut && s(rank) > 0.0) ++rank;
  return svd.matrixU().leftCols(rank);
}

double principal_angle(const Matrix& u, const Matrix& v) {
  if (u.cols() != v.cols()) return std::numbers::pi / 2;
  if (u.cols() == 0) return 0.0;
  // sin of the largest angle = ||(I - V V^T) U||
  const Matrix residual = u - v * (v.transpose() * u);
  const double s = std::min(1.0, op_norm(residual));
  return std::asin(s);
}

Matrix orthonormal_factor(const Matrix& m) {
  Eigen::HouseholderQR<Matrix> qr(m);
  return qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
}

Matrix random_orthogonal(int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Matrix g(d, d);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) {
      // map to (-1, 1); the exact distribution is irrelevant, genericity is not
      g(i, j) = static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0;
    }
  }
  return orthonormal_factor(g);
}

LogScaledProduct::LogScaledProduct(Matrix start) : m_(std::move(start)) { renormalize(); }

void LogScaledProduct::left_multiply(const Matrix& m) {
  m_ = multiply(m, m_);
  renormalize();
}

void LogScaledProduct::renormalize() {
  if (!std::isfinite(log_scale_)) return;
  const double s = kernels::active().max_abs(m_.data(), static_cast<std::size_t>(m_.size()));
  if (s == 0.0) {
    log_scale_ = -std::numeric_limits<double>::infinity();
    return;
  }
  kernels::active().scale(m_.data(), 1.0 / s, static_cast<std::size_t>(m_.size()));
  log_scale_ += std::log(s);
}

double LogScaledProduct::log_norm() const {
  if (!std::isfinite(log_scale_)) return log_scale_;
  const double n = op_norm(m_);
  if (n == 0.0) return -std::numeric_limits<double>::infinity();
  return log_scale_ + std::log(n);
}

double regression_slope(const std::vector<double>& y) {
  const std::size_t n = y.size();
  if (n < 2) return 0.0;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<double>(i);
  const auto& k = kernels::active();
  const double mx = k.sum(x.data(), n) / static_cast<double>(n);
  const double my = k.sum(y.data(), n) / static_cast<double>(n);
  const double sxy = k.dot(x.data(), y.data(), n) - static_cast<double>(n) * mx * my;
  const double sxx = k.dot(x.data(), x.data(), n) - static_cast<double>(n) * mx * mx;
  return sxy / sxx;
}

}  // namespace sspec::linalg
