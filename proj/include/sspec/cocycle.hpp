#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sspec/base_dynamics.hpp"
#include "sspec/linalg.hpp"
#include "sspec/noncompactness_model.hpp"

namespace sspec {

struct ConstantGenerator {
  Matrix matrix;
};

/// One matrix per word q_0 q_1 ... q_{block-1}, indexed as a base-`alphabet`
/// number with q_0 most significant. block == 1 is the usual
/// symbol-dependent generator. Over a finite periodic orbit the "symbol" is
/// the orbit index.
struct SymbolGenerator {
  std::vector<Matrix> matrices;
  int alphabet = 2;
  int block = 1;
};

struct AngleGenerator {
  std::function<Matrix(double)> eval;
  std::string name;
};

/// The generator q -> A(q) of a cocycle.
class CocycleGenerator {
 public:
  using Kind = std::variant<ConstantGenerator, SymbolGenerator, AngleGenerator>;

  static CocycleGenerator constant(Matrix m);
  static CocycleGenerator symbol_dependent(std::vector<Matrix> matrices, int alphabet, int block = 1);
  static CocycleGenerator angle_dependent(int dim, std::function<Matrix(double)> eval, std::string name);

  const Kind& kind() const { return kind_; }
  int dim() const { return dim_; }
  bool is_constant() const { return std::holds_alternative<ConstantGenerator>(kind_); }

  /// Coordinates beyond q_0 the generator reads.
  int lookahead() const;

  Matrix at(const BaseSystem& base, const BasePoint& q) const;

  /// True when every matrix the generator can produce is diagonal.
  bool is_diagonal() const;

 private:
  CocycleGenerator(Kind k, int dim) : kind_(std::move(k)), dim_(dim) {}
  Kind kind_;
  int dim_ = 0;
};

class ProductCache;

/// A linear cocycle over (M, f), optionally rescaled by e^{-a n}.
class Cocycle {
 public:
  Cocycle(BaseSystem base, CocycleGenerator generator, double shift = 0.0,
          std::optional<NoncompactnessModel> model = std::nullopt);

  const BaseSystem& base() const { return base_; }
  const CocycleGenerator& generator() const { return generator_; }
  double shift() const { return shift_; }
  int dim() const { return generator_.dim(); }
  const std::optional<NoncompactnessModel>& model() const { return model_; }

  /// Unshifted A(q).
  Matrix generator_at(const BasePoint& q) const;

  /// e^{-a n} A(f^{n-1} q) ... A(q); identity for n = 0. Dyadic blocks of the
  /// unshifted product are cached per base point, so a repeated (q, n) query
  /// is bitwise reproducible.
  Matrix product(const BasePoint& q, int n) const;

  /// log ||A_a(q, n)||, accumulated with rescaling (safe for any n).
  double log_norm(const BasePoint& q, int n) const;

  /// Same base, generator and cache with the shift replaced by a.
  Cocycle with_shift(double a) const;

  /// Throws kWindowTooShort unless q's window covers coordinates [from, to + lookahead].
  void require_window(const BasePoint& q, std::int64_t from, std::int64_t to) const;

 private:
  Matrix dyadic_block(const BasePoint& q, int level) const;

  BaseSystem base_;
  CocycleGenerator generator_;
  double shift_ = 0.0;
  std::optional<NoncompactnessModel> model_;
  std::shared_ptr<ProductCache> cache_;
};

Matrix cocycle_product(const Cocycle& c, const BasePoint& q, int n);

Cocycle shifted(const Cocycle& c, double a);

struct NormBound {
  double value = 0.0;
  bool exact = true;       // false for grid maxima over angles
  double grid_step = 0.0;  // angle grid spacing when !exact
};

/// C >= sup_q ||A_a(q)|| (exact over finite generator sets, grid max over angles).
NormBound uniform_norm_bound(const Cocycle& c, int sample_budget);

}  // namespace sspec
