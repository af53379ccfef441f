#include "sspec/quasicompactness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sspec/error.hpp"
#include "sspec/lyapunov.hpp"

namespace sspec {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_head(const NoncompactnessModel& model, const Matrix& head) {
  if (head.rows() != model.head_dim() || head.cols() != model.head_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "operator does not match the model's head dimension");
  }
}

}  // namespace

double ModelOperator::op_norm() const {
  // Block-diagonal head/tail: the norm is the larger of the two blocks.
  return std::max(linalg::op_norm(head), std::exp(log_tail));
}

ModelOperator model_product(const Cocycle& c, const NoncompactnessModel& model, const BasePoint& q, int n) {
  check_head(model, Matrix::Zero(c.dim(), c.dim()));
  ModelOperator op;
  op.head = c.product(q, n);
  const double t = model.log_tail_per_step();
  op.log_tail = n == 0 ? (model.is_finite_dim() ? kNegInf : 0.0) : (std::isinf(t) ? t : n * (t - c.shift()));
  return op;
}

double ic_norm_upper(const NoncompactnessModel& model, const ModelOperator& op) {
  check_head(model, op.head);
  if (model.is_finite_dim()) return 0.0;
  return std::exp(op.log_tail);
}

double ic_norm_upper(const NoncompactnessModel& model, const Matrix& head) {
  check_head(model, head);
  return model.is_finite_dim() ? 0.0 : std::exp(model.log_tail_per_step());
}

ExtendedReal kappa_estimate(const Cocycle& c, const NoncompactnessModel& model, const ErgodicMeasure& mu,
                            int n_max, std::uint64_t seed) {
  if (n_max < 2) throw Error(ErrorCode::kInvalidArgument, "kappa_estimate needs n_max >= 2");
  if (model.is_finite_dim()) return ExtendedReal::minus_infinity();
  const auto points = typical_points(mu, c.base(), 8, seed, Window{0, n_max + c.generator().lookahead()});
  double total = 0.0;
  for (const auto& q : points) {
    const ModelOperator op = model_product(c, model, q, n_max);
    const double ic = ic_norm_upper(model, op);
    if (ic == 0.0) return ExtendedReal::minus_infinity();
    total += std::log(ic) / n_max;
  }
  return ExtendedReal(total / static_cast<double>(points.size()));
}

ExtendedReal global_kappa(const Cocycle& c, const NoncompactnessModel& model, const MeasureFamily& family,
                          int n_max, std::uint64_t seed) {
  if (family.empty()) throw Error(ErrorCode::kInvalidArgument, "measure family is empty");
  if (model.is_finite_dim()) return ExtendedReal::minus_infinity();
  ExtendedReal best;
  for (const auto& m : family.members()) best = max(best, kappa_estimate(c, model, m.measure, n_max, seed));
  for (const auto& q : orbit_points(family)) {
    const double ic = ic_norm_upper(model, model_product(c, model, q, n_max));
    if (ic > 0.0) best = max(best, ExtendedReal(std::log(ic) / n_max));
  }
  return best;
}

VectorNorm VectorNorm::weighted_sup(std::vector<double> w) {
  if (w.empty()) throw Error(ErrorCode::kInvalidArgument, "weighted sup norm needs weights");
  for (double x : w) {
    if (!(x > 0.0) || !std::isfinite(x)) throw Error(ErrorCode::kInvalidArgument, "norm weights must be > 0");
  }
  return VectorNorm{Kind::kWeightedSup, std::move(w)};
}

double VectorNorm::operator()(const Vector& x) const {
  if (kind == Kind::kEuclidean) return x.norm();
  if (static_cast<std::size_t>(x.size()) != weights.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "vector length differs from the norm weights");
  }
  double m = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) m = std::max(m, weights[i] * std::fabs(x(i)));
  return m;
}

double VectorNorm::induced(const Matrix& a) const {
  if (kind == Kind::kEuclidean) return linalg::op_norm(a);
  if (static_cast<std::size_t>(a.rows()) != weights.size() || a.rows() != a.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "matrix shape differs from the norm weights");
  }
  // ||A|| = max_i sum_j w_i |a_ij| / w_j for |x| = max_i w_i |x_i|.
  double m = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j) row += weights[i] * std::fabs(a(i, j)) / weights[j];
    m = std::max(m, row);
  }
  return m;
}

QuasicompactReport check_lasota_yorke(const Cocycle& c, const LasotaYorkeData& data) {
  if (data.samples.empty()) throw Error(ErrorCode::kInvalidArgument, "Lasota-Yorke check needs sample points");
  if (!data.alpha || !data.beta || !data.gamma) {
    throw Error(ErrorCode::kInvalidArgument, "Lasota-Yorke data needs alpha, beta and gamma");
  }
  QuasicompactReport out;
  out.worst_residual = std::numeric_limits<double>::infinity();
  for (const auto& q : data.samples) {
    const double al = data.alpha(q);
    const double be = data.beta(q);
    const double ga = data.gamma(q);
    if (!(al > 0.0 && be > 0.0 && ga > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "alpha, beta, gamma must be strictly positive");
    }
    const Matrix a = c.product(q, 1);
    for (const auto& x : data.test_vectors) {
      if (x.size() != a.cols() || x.isZero(0.0)) {
        throw Error(ErrorCode::kInvalidArgument, "test vectors must be nonzero and match the dimension");
      }
      const double r = al * data.strong(x) + be * data.weak(x) - data.strong(a * x);
      out.ly1_residuals.push_back(r);
      out.worst_residual = std::min(out.worst_residual, r);
    }
    const double r2 = ga - data.strong.induced(a);
    out.ly2_residuals.push_back(r2);
    out.worst_residual = std::min(out.worst_residual, r2);
  }
  out.inequalities_hold = out.worst_residual >= -out.tolerance;
  out.verdict = out.inequalities_hold ? "pass" : "fail";
  return out;
}

QuasicompactReport kappa_bound_via_ly(const LasotaYorkeData& data, const BaseSystem& system,
                                      const ErgodicMeasure& mu, double lambda_mu, double tolerance,
                                      std::int64_t n, std::uint64_t seed) {
  if (!data.alpha) throw Error(ErrorCode::kInvalidArgument, "Lasota-Yorke data needs alpha");
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "Birkhoff length must be >= 2");
  std::vector<BasePoint> orbit;
  if (const auto* po = std::get_if<PeriodicOrbit>(&mu.kind)) {
    orbit = po->points;
  } else {
    orbit = sample_orbit(mu, system, n, seed);
  }
  double sum = 0.0;
  double sum_sq = 0.0;
  for (const auto& q : orbit) {
    const double al = data.alpha(q);
    if (!(al > 0.0)) throw Error(ErrorCode::kInvalidArgument, "alpha must be strictly positive");
    const double v = std::log(al);
    sum += v;
    sum_sq += v * v;
  }
  const double m = static_cast<double>(orbit.size());
  QuasicompactReport out;
  const double mean = sum / m;
  out.kappa = ExtendedReal(mean);
  out.kappa_stderr = m > 1 ? std::sqrt(std::max(0.0, (sum_sq - m * mean * mean) / (m - 1)) / m) : 0.0;
  out.lambda = lambda_mu;
  out.margin = lambda_mu - mean;
  out.tolerance = tolerance;
  out.verdict = out.margin > tolerance ? "quasicompact" : "inconclusive";
  return out;
}

QuasicompactReport quasicompact_report(const Cocycle& c, const NoncompactnessModel& model,
                                       const ErgodicMeasure& mu, int n_max, double tolerance,
                                       std::uint64_t seed) {
  QuasicompactReport out;
  out.kappa = kappa_estimate(c, model, mu, n_max, seed);
  out.lambda = top_exponent(c, mu, n_max, seed).value;
  out.margin = out.kappa.is_finite() ? out.lambda - out.kappa.value() : std::numeric_limits<double>::infinity();
  out.tolerance = tolerance;
  out.verdict = out.margin > tolerance ? "quasicompact" : "inconclusive";
  return out;
}

}  // namespace sspec
