#pragma once

#include <cstdint>
#include <vector>

#include "sspec/cocycle.hpp"

namespace sspec {

/// QR frames along a finite piece of the orbit of q.
///
/// Forward frames: A(q_j) Q_j = Q_{j+1} R_j, started at step -back - transient
/// from a fixed orthogonal matrix. The first k columns of Q_j converge to the
/// k-dimensional subspace of fastest backward-extendable growth.
///
/// Adjoint frames: A(q_j)^T W_{j+1} = W_j R'_j, started at step fwd + transient.
/// The complement of the first k columns of W_j converges to the subspace of
/// slowest forward growth (codimension k).
///
/// Both families are computed with the unshifted generator.
class OrbitFrames {
 public:
  OrbitFrames(const Cocycle& c, const BasePoint& q, int back, int fwd, int transient,
              std::uint64_t seed = 7);

  int dim() const { return dim_; }
  int back() const { return back_; }
  int fwd() const { return fwd_; }

  using View = Eigen::Map<const Matrix>;

  /// Q_j for j in [-back, fwd].
  View forward(int j) const;
  /// R_j for j in [-back, fwd - 1].
  View r(int j) const;
  /// W_j for j in [-back, fwd].
  View adjoint(int j) const;
  /// A(q_j) for j in [-back, fwd - 1].
  View generator(int j) const;

  /// (1/n) sum_{j<n} log|R_j(k,k)|, n in [1, fwd]; -inf for killed directions.
  Vector forward_rates(int n) const;

  /// First u columns of Q_j.
  Matrix unstable(int j, int u) const { return forward(j).leftCols(u); }
  /// Last d - u columns of W_j.
  Matrix stable(int j, int u) const { return adjoint(j).rightCols(dim_ - u); }

  /// True when a constant diagonal generator allowed exact coordinate frames.
  bool exact() const { return exact_; }

 private:
  std::size_t slot(int j, int hi) const;
  View view(const std::vector<double>& store, std::size_t k) const;
  static void put(std::vector<double>& store, std::size_t k, const Matrix& m);

  int dim_ = 0;
  int back_ = 0;
  int fwd_ = 0;
  bool exact_ = false;
  // Column-major d x d blocks, one per stored step.
  std::vector<double> q_;
  std::vector<double> r_;
  std::vector<double> w_;
  std::vector<double> a_;
};

/// Orthogonal factor with nonnegative R diagonal: m = Q R.
void signed_qr(const Matrix& m, Matrix& q, Matrix& r);

/// Permutation sorting |diag(d)| in decreasing order (stable).
Matrix sorting_permutation(const Matrix& diagonal);

}  // namespace sspec
