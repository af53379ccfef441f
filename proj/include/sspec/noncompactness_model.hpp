#pragma once

#include <optional>
#include <string>
#include <variant>

namespace sspec {

/// Closed-form weight sequence w_k, k >= 1, for diagonal operator models.
///
/// Families (all nonincreasing for valid parameters, so the tail supremum over
/// k > N is w_{N+1}):
///   half_plus_inv_k      w_k = 1/2 + 1/k
///   const_plus_inv_k(c)  w_k = c + 1/k,   c >= 0
///   geometric(r)         w_k = r^k,       0 < r < 1
///   power(p)             w_k = k^{-p},    p > 0
/// `lead`, when set, replaces w_1 only.
struct WeightSequence {
  std::string family = "half_plus_inv_k";
  double parameter = 0.0;
  std::optional<double> lead;

  static WeightSequence make(const std::string& family, double parameter = 0.0,
                             std::optional<double> lead = std::nullopt);

  double operator()(long k) const;
  /// sup_{k > n} |w_k|
  double tail_sup(long n) const;
  std::string describe() const;
};

struct FiniteDim {
  int dim = 1;
};

/// diag(w_1, w_2, ...) truncated to its first `truncation` coordinates; the
/// discarded tail is accounted for by its exact supremum.
struct DiagonalOperator {
  WeightSequence weights;
  int truncation = 1;
};

/// Banded operator with a finite head block and a tail block whose norm is
/// bounded by `tail_norm` per step.
struct Banded {
  int truncation = 1;
  double tail_norm = 0.0;
};

/// Measure-of-noncompactness model attached to a cocycle.
class NoncompactnessModel {
 public:
  using Kind = std::variant<FiniteDim, DiagonalOperator, Banded>;

  static NoncompactnessModel finite_dim(int dim);
  static NoncompactnessModel diagonal(WeightSequence weights, int truncation);
  static NoncompactnessModel banded(int truncation, double tail_norm);

  const Kind& kind() const { return kind_; }
  bool is_finite_dim() const { return std::holds_alternative<FiniteDim>(kind_); }

  /// Dimension of the explicitly represented block.
  int head_dim() const;

  /// log of the one-step tail bound; -inf in finite dimensions.
  double log_tail_per_step() const;

  std::string describe() const;

 private:
  explicit NoncompactnessModel(Kind k) : kind_(std::move(k)) {}
  Kind kind_;
};

}  // namespace sspec
