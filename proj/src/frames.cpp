#include "sspec/frames.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sspec/error.hpp"

namespace sspec {

void signed_qr(const Matrix& m, Matrix& q, Matrix& r) {
  if (m.rows() == 1 && m.cols() == 1) {
    q.setConstant(1, 1, m(0, 0) < 0.0 ? -1.0 : 1.0);
    r.setConstant(1, 1, std::fabs(m(0, 0)));
    return;
  }
  Eigen::HouseholderQR<Matrix> qr(m);
  const auto d = m.cols();
  q = qr.householderQ() * Matrix::Identity(m.rows(), d);
  r = qr.matrixQR().topRows(d).triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < d; ++k) {
    if (r(k, k) < 0.0) {
      r.row(k) *= -1.0;
      q.col(k) *= -1.0;
    }
  }
}

Matrix sorting_permutation(const Matrix& diagonal) {
  const int d = static_cast<int>(diagonal.rows());
  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
    return std::fabs(diagonal(i, i)) > std::fabs(diagonal(j, j));
  });
  Matrix p = Matrix::Zero(d, d);
  for (int k = 0; k < d; ++k) p(order[k], k) = 1.0;
  return p;
}

OrbitFrames::OrbitFrames(const Cocycle& c, const BasePoint& q, int back, int fwd, int transient,
                         std::uint64_t seed)
    : dim_(c.dim()), back_(back), fwd_(fwd) {
  if (back < 0 || fwd < 1 || transient < 0) {
    throw Error(ErrorCode::kInvalidArgument, "frame horizons must be back >= 0, fwd >= 1");
  }
  const auto& gen = c.generator();
  if (gen.is_constant() && gen.is_diagonal()) {
    // Coordinate axes, sorted by modulus, are exact frames for every step.
    const Matrix& a = std::get<ConstantGenerator>(gen.kind()).matrix;
    const Matrix p = sorting_permutation(a);
    Matrix r = p.transpose() * a * p;
    for (int k = 0; k < dim_; ++k) {
      if (r(k, k) < 0.0) r(k, k) = -r(k, k);
    }
    exact_ = true;
    put(q_, 0, p);
    put(w_, 0, p);
    put(r_, 0, r);
    put(a_, 0, a);
    return;
  }

  const int lo = -back - transient;
  const int hi = fwd + transient;
  c.require_window(q, lo, hi - 1);
  std::vector<Matrix> gens;
  gens.reserve(static_cast<std::size_t>(hi - lo));
  BasePoint p = iterate(c.base(), q, lo);
  for (int j = lo; j < hi; ++j) {
    gens.push_back(c.generator_at(p));
    p = iterate(c.base(), p, 1);
  }
  auto gen_at = [&](int j) -> const Matrix& { return gens[static_cast<std::size_t>(j - lo)]; };

  const Matrix start = linalg::random_orthogonal(dim_, seed);
  const std::size_t block = static_cast<std::size_t>(dim_) * dim_;
  q_.resize(block * (back + fwd + 1));
  r_.resize(block * (back + fwd));
  w_.resize(block * (back + fwd + 1));
  a_.resize(block * (back + fwd));
  for (int j = -back; j < fwd; ++j) put(a_, slot(j, fwd - 1), gen_at(j));

  Matrix qj = start;
  Matrix qn;
  Matrix rj;
  for (int j = lo; j < fwd; ++j) {
    if (j >= -back) put(q_, slot(j, fwd), qj);
    signed_qr(linalg::multiply(gen_at(j), qj), qn, rj);
    if (j >= -back) put(r_, slot(j, fwd - 1), rj);
    qj = qn;
  }
  put(q_, slot(fwd, fwd), qj);

  Matrix wj = start;
  for (int j = hi; j > -back; --j) {
    if (j <= fwd) put(w_, slot(j, fwd), wj);
    signed_qr(linalg::multiply(gen_at(j - 1).transpose(), wj), qn, rj);
    wj = qn;
  }
  put(w_, slot(-back, fwd), wj);
}

std::size_t OrbitFrames::slot(int j, int hi) const {
  if (j < -back_ || j > hi) throw Error(ErrorCode::kInvalidArgument, "frame index outside the computed horizon");
  return exact_ ? 0 : static_cast<std::size_t>(j + back_);
}

void OrbitFrames::put(std::vector<double>& store, std::size_t k, const Matrix& m) {
  const std::size_t block = static_cast<std::size_t>(m.size());
  if (store.size() < (k + 1) * block) store.resize((k + 1) * block);
  std::copy(m.data(), m.data() + block, store.begin() + static_cast<std::ptrdiff_t>(k * block));
}

OrbitFrames::View OrbitFrames::view(const std::vector<double>& store, std::size_t k) const {
  return View(store.data() + k * static_cast<std::size_t>(dim_) * dim_, dim_, dim_);
}

OrbitFrames::View OrbitFrames::forward(int j) const { return view(q_, slot(j, fwd_)); }
OrbitFrames::View OrbitFrames::r(int j) const { return view(r_, slot(j, fwd_ - 1)); }
OrbitFrames::View OrbitFrames::adjoint(int j) const { return view(w_, slot(j, fwd_)); }
OrbitFrames::View OrbitFrames::generator(int j) const { return view(a_, slot(j, fwd_ - 1)); }

Vector OrbitFrames::forward_rates(int n) const {
  if (n < 1 || n > fwd_) throw Error(ErrorCode::kInvalidArgument, "rate horizon outside the computed frames");
  Vector sums = Vector::Zero(dim_);
  for (int j = 0; j < (exact_ ? 1 : n); ++j) {
    const View rj = r(j);
    for (int k = 0; k < dim_; ++k) sums(k) += std::log(std::fabs(rj(k, k)));
  }
  return exact_ ? sums : Vector(sums / n);
}

}  // namespace sspec
