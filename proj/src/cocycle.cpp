#include "sspec/cocycle.hpp"

#include <cmath>
#include <mutex>
#include <sstream>
#include <unordered_map>

#include "sspec/error.hpp"

namespace sspec {

/// Dyadic blocks A(f^{2^k - 1} p) ... A(p) of the unshifted cocycle.
class ProductCache {
 public:
  struct Key {
    PointKey point;
    int level = 0;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      return PointKeyHash{}(k.point) * 31u + static_cast<std::size_t>(k.level);
    }
  };

  std::optional<Matrix> find(const Key& k) const {
    std::lock_guard lock(mutex_);
    const auto it = blocks_.find(k);
    if (it == blocks_.end()) return std::nullopt;
    return it->second;
  }

  void insert(const Key& k, const Matrix& m) {
    std::lock_guard lock(mutex_);
    if (stored_doubles_ + static_cast<std::size_t>(m.size()) > kMaxDoubles) return;
    if (blocks_.emplace(k, m).second) stored_doubles_ += static_cast<std::size_t>(m.size());
  }

 private:
  static constexpr std::size_t kMaxDoubles = std::size_t{1} << 21;
  mutable std::mutex mutex_;
  std::unordered_map<Key, Matrix, KeyHash> blocks_;
  std::size_t stored_doubles_ = 0;
};

namespace {

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw Error(ErrorCode::kInvalidArgument, std::string(what) + " has non-finite entries");
}

}  // namespace

CocycleGenerator CocycleGenerator::constant(Matrix m) {
  if (m.rows() < 1 || m.rows() != m.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "generator must be a non-empty square matrix");
  }
  require_finite(m, "constant generator");
  const int d = static_cast<int>(m.rows());
  return CocycleGenerator(ConstantGenerator{std::move(m)}, d);
}

CocycleGenerator CocycleGenerator::symbol_dependent(std::vector<Matrix> matrices, int alphabet, int block) {
  if (alphabet < 1 || block < 1) throw Error(ErrorCode::kInvalidArgument, "alphabet and block must be >= 1");
  double expected = std::pow(static_cast<double>(alphabet), block);
  if (static_cast<double>(matrices.size()) != expected) {
    std::ostringstream msg;
    msg << "symbol-dependent generator needs exactly " << expected << " matrices, got " << matrices.size();
    throw Error(ErrorCode::kInvalidArgument, msg.str());
  }
  const auto d = matrices.front().rows();
  for (const auto& m : matrices) {
    if (m.rows() != d || m.cols() != d || d < 1) {
      throw Error(ErrorCode::kDimensionMismatch, "symbol matrices must share one square shape");
    }
    require_finite(m, "symbol matrix");
  }
  return CocycleGenerator(SymbolGenerator{std::move(matrices), alphabet, block}, static_cast<int>(d));
}

CocycleGenerator CocycleGenerator::angle_dependent(int dim, std::function<Matrix(double)> eval,
                                                   std::string name) {
  if (dim < 1) throw Error(ErrorCode::kInvalidArgument, "dimension must be >= 1");
  if (!eval) throw Error(ErrorCode::kInvalidArgument, "angle generator needs an evaluator");
  return CocycleGenerator(AngleGenerator{std::move(eval), std::move(name)}, dim);
}

int CocycleGenerator::lookahead() const {
  if (const auto* s = std::get_if<SymbolGenerator>(&kind_)) return s->block - 1;
  return 0;
}

bool CocycleGenerator::is_diagonal() const {
  auto diagonal = [](const Matrix& m) { return m.isDiagonal(0.0); };
  if (const auto* c = std::get_if<ConstantGenerator>(&kind_)) return diagonal(c->matrix);
  if (const auto* s = std::get_if<SymbolGenerator>(&kind_)) {
    for (const auto& m : s->matrices) {
      if (!diagonal(m)) return false;
    }
    return true;
  }
  return dim_ == 1;
}

Matrix CocycleGenerator::at(const BaseSystem& /*base*/, const BasePoint& q) const {
  if (const auto* c = std::get_if<ConstantGenerator>(&kind_)) return c->matrix;
  if (const auto* s = std::get_if<SymbolGenerator>(&kind_)) {
    std::size_t index = 0;
    if (const auto* sp = std::get_if<ShiftPoint>(&q)) {
      for (int j = 0; j < s->block; ++j) {
        const Symbol x = sp->at(j);
        if (x >= s->alphabet) throw Error(ErrorCode::kInvalidArgument, "symbol outside generator alphabet");
        index = index * static_cast<std::size_t>(s->alphabet) + x;
      }
    } else if (const auto* op = std::get_if<OrbitPoint>(&q)) {
      if (s->block != 1 || op->index >= s->alphabet) {
        throw Error(ErrorCode::kVariantMismatch, "orbit-indexed generator needs one matrix per orbit point");
      }
      index = static_cast<std::size_t>(op->index);
    } else {
      throw Error(ErrorCode::kVariantMismatch, "symbol-dependent generator needs a shift or orbit point");
    }
    return s->matrices[index];
  }
  const auto* cp = std::get_if<CirclePoint>(&q);
  if (cp == nullptr) throw Error(ErrorCode::kVariantMismatch, "angle-dependent generator needs a circle point");
  Matrix m = std::get<AngleGenerator>(kind_).eval(cp->angle);
  if (m.rows() != dim_ || m.cols() != dim_) {
    throw Error(ErrorCode::kDimensionMismatch, "angle generator returned a matrix of the wrong shape");
  }
  require_finite(m, "angle generator value");
  return m;
}

Cocycle::Cocycle(BaseSystem base, CocycleGenerator generator, double shift,
                 std::optional<NoncompactnessModel> model)
    : base_(std::move(base)),
      generator_(std::move(generator)),
      shift_(shift),
      model_(std::move(model)),
      cache_(std::make_shared<ProductCache>()) {
  if (!std::isfinite(shift_)) throw Error(ErrorCode::kInvalidArgument, "shift must be finite");
  if (model_ && model_->head_dim() != generator_.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "operator model head dimension differs from the generator");
  }
  const bool symbolic = std::holds_alternative<SymbolGenerator>(generator_.kind());
  if (symbolic && base_.is_circle()) {
    throw Error(ErrorCode::kVariantMismatch, "symbol-dependent generator over a rotation");
  }
  if (std::holds_alternative<AngleGenerator>(generator_.kind()) && !base_.is_circle()) {
    throw Error(ErrorCode::kVariantMismatch, "angle-dependent generator needs a circle rotation");
  }
  if (symbolic) {
    const auto& s = std::get<SymbolGenerator>(generator_.kind());
    if (s.alphabet != base_.symbol_count()) {
      throw Error(ErrorCode::kVariantMismatch, "generator alphabet differs from the base system");
    }
  }
}

Matrix Cocycle::generator_at(const BasePoint& q) const { return generator_.at(base_, q); }

void Cocycle::require_window(const BasePoint& q, std::int64_t from, std::int64_t to) const {
  const auto* sp = std::get_if<ShiftPoint>(&q);
  if (sp == nullptr) return;
  const std::int64_t hi = to + generator_.lookahead();
  if (!sp->covers(from, hi)) {
    std::ostringstream msg;
    msg << "shift window too short: need coordinates [" << from << ", " << hi << "]";
    throw Error(ErrorCode::kWindowTooShort, msg.str());
  }
}

Matrix Cocycle::dyadic_block(const BasePoint& q, int level) const {
  if (level == 0) return generator_at(q);
  const ProductCache::Key key{point_key(q), level};
  if (auto hit = cache_->find(key)) return *hit;
  const std::int64_t half = std::int64_t{1} << (level - 1);
  const Matrix lower = dyadic_block(q, level - 1);
  const Matrix upper = dyadic_block(iterate(base_, q, half), level - 1);
  Matrix block = linalg::multiply(upper, lower);
  cache_->insert(key, block);
  return block;
}

Matrix Cocycle::product(const BasePoint& q, int n) const {
  if (n < 0) throw Error(ErrorCode::kInvalidArgument, "product length must be >= 0");
  base_.check_point(q);
  const int d = dim();
  if (n == 0) return Matrix::Identity(d, d);
  require_window(q, 0, n - 1);
  Matrix result = Matrix::Identity(d, d);
  BasePoint p = q;
  int remaining = n;
  while (remaining > 0) {
    int level = 0;
    while ((2 << level) <= remaining) ++level;
    result = linalg::multiply(dyadic_block(p, level), result);
    p = iterate(base_, p, std::int64_t{1} << level);
    remaining -= 1 << level;
  }
  if (shift_ != 0.0) result *= std::exp(-shift_ * n);
  return result;
}

double Cocycle::log_norm(const BasePoint& q, int n) const {
  if (n < 0) throw Error(ErrorCode::kInvalidArgument, "product length must be >= 0");
  const int d = dim();
  if (n == 0) return 0.0;
  require_window(q, 0, n - 1);
  linalg::LogScaledProduct acc(Matrix::Identity(d, d));
  BasePoint p = q;
  for (int i = 0; i < n; ++i) {
    acc.left_multiply(generator_at(p));
    p = iterate(base_, p, 1);
  }
  return acc.log_norm() - shift_ * n;
}

Cocycle Cocycle::with_shift(double a) const {
  Cocycle out = *this;
  if (!std::isfinite(a)) throw Error(ErrorCode::kInvalidArgument, "shift must be finite");
  out.shift_ = a;
  return out;
}

Matrix cocycle_product(const Cocycle& c, const BasePoint& q, int n) { return c.product(q, n); }

Cocycle shifted(const Cocycle& c, double a) { return c.with_shift(a); }

NormBound uniform_norm_bound(const Cocycle& c, int sample_budget) {
  if (sample_budget < 1) throw Error(ErrorCode::kInvalidArgument, "sample budget must be >= 1");
  NormBound out;
  double best = 0.0;
  const auto& kind = c.generator().kind();
  if (const auto* k = std::get_if<ConstantGenerator>(&kind)) {
    best = linalg::op_norm(k->matrix);
  } else if (const auto* s = std::get_if<SymbolGenerator>(&kind)) {
    for (const auto& m : s->matrices) best = std::max(best, linalg::op_norm(m));
  } else {
    const auto& g = std::get<AngleGenerator>(kind);
    for (int i = 0; i < sample_budget; ++i) {
      best = std::max(best, linalg::op_norm(g.eval(static_cast<double>(i) / sample_budget)));
    }
    out.exact = false;
    out.grid_step = 1.0 / sample_budget;
  }
  if (c.model()) best = std::max(best, std::exp(c.model()->log_tail_per_step()));
  out.value = best * std::exp(-c.shift());
  return out;
}

}  // namespace sspec
