#include "sspec/noncompactness_model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "sspec/error.hpp"

namespace sspec {

WeightSequence WeightSequence::make(const std::string& family, double parameter,
                                    std::optional<double> lead) {
  if (family == "half_plus_inv_k") {
    // no parameter
  } else if (family == "const_plus_inv_k") {
    if (!(parameter >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "const_plus_inv_k needs c >= 0");
  } else if (family == "geometric") {
    if (!(parameter > 0.0 && parameter < 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "geometric weights need 0 < r < 1");
    }
  } else if (family == "power") {
    if (!(parameter > 0.0)) throw Error(ErrorCode::kInvalidArgument, "power weights need p > 0");
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown weight family '" + family + "'");
  }
  if (lead && !std::isfinite(*lead)) throw Error(ErrorCode::kInvalidArgument, "lead weight must be finite");
  return WeightSequence{family, parameter, lead};
}

double WeightSequence::operator()(long k) const {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "weights are indexed from k = 1");
  if (k == 1 && lead) return *lead;
  const double kk = static_cast<double>(k);
  if (family == "half_plus_inv_k") return 0.5 + 1.0 / kk;
  if (family == "const_plus_inv_k") return parameter + 1.0 / kk;
  if (family == "geometric") return std::pow(parameter, kk);
  return std::pow(kk, -parameter);
}

double WeightSequence::tail_sup(long n) const {
  // every family is nonincreasing in k and lead only touches k = 1 <= n
  return std::fabs((*this)(n + 1));
}

std::string WeightSequence::describe() const {
  std::ostringstream out;
  out << family;
  if (family != "half_plus_inv_k") out << "(" << parameter << ")";
  if (lead) out << " lead " << *lead;
  return out.str();
}

NoncompactnessModel NoncompactnessModel::finite_dim(int dim) {
  if (dim < 1) throw Error(ErrorCode::kInvalidArgument, "dimension must be >= 1");
  return NoncompactnessModel(FiniteDim{dim});
}

NoncompactnessModel NoncompactnessModel::diagonal(WeightSequence weights, int truncation) {
  if (truncation < 1) throw Error(ErrorCode::kInvalidArgument, "truncation must be >= 1");
  return NoncompactnessModel(DiagonalOperator{std::move(weights), truncation});
}

NoncompactnessModel NoncompactnessModel::banded(int truncation, double tail_norm) {
  if (truncation < 1) throw Error(ErrorCode::kInvalidArgument, "truncation must be >= 1");
  if (!(tail_norm >= 0.0) || !std::isfinite(tail_norm)) {
    throw Error(ErrorCode::kInvalidArgument, "tail norm bound must be finite and >= 0");
  }
  return NoncompactnessModel(Banded{truncation, tail_norm});
}

int NoncompactnessModel::head_dim() const {
  if (const auto* f = std::get_if<FiniteDim>(&kind_)) return f->dim;
  if (const auto* d = std::get_if<DiagonalOperator>(&kind_)) return d->truncation;
  return std::get<Banded>(kind_).truncation;
}

double NoncompactnessModel::log_tail_per_step() const {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (is_finite_dim()) return kNegInf;
  double t = 0.0;
  if (const auto* d = std::get_if<DiagonalOperator>(&kind_)) {
    t = d->weights.tail_sup(d->truncation);
  } else {
    t = std::get<Banded>(kind_).tail_norm;
  }
  return t > 0.0 ? std::log(t) : kNegInf;
}

std::string NoncompactnessModel::describe() const {
  std::ostringstream out;
  if (const auto* f = std::get_if<FiniteDim>(&kind_)) {
    out << "finite_dim(" << f->dim << ")";
  } else if (const auto* d = std::get_if<DiagonalOperator>(&kind_)) {
    out << "diagonal[" << d->weights.describe() << ", N=" << d->truncation << "]";
  } else {
    const auto& b = std::get<Banded>(kind_);
    out << "banded[N=" << b.truncation << ", tail=" << b.tail_norm << "]";
  }
  return out.str();
}

}  // namespace sspec
