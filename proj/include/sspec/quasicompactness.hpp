#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sspec/base_dynamics.hpp"
#include "sspec/cocycle.hpp"
#include "sspec/extended_real.hpp"
#include "sspec/linalg.hpp"
#include "sspec/noncompactness_model.hpp"

namespace sspec {

/// An operator of a model: explicit head block plus a tail bounded by
/// e^{log_tail} (-inf for finite-dimensional operators).
struct ModelOperator {
  Matrix head;
  double log_tail = -std::numeric_limits<double>::infinity();

  double op_norm() const;
};

/// A(q, n) as a model operator; the tail multiplies step by step.
ModelOperator model_product(const Cocycle& c, const NoncompactnessModel& model, const BasePoint& q, int n);

/// Upper bound for the measure-of-noncompactness norm of op.
double ic_norm_upper(const NoncompactnessModel& model, const ModelOperator& op);
double ic_norm_upper(const NoncompactnessModel& model, const Matrix& head);

/// Upper estimate of kappa(mu): (1/n_max) log ic(A(q, n_max)) averaged over
/// mu-typical q.
ExtendedReal kappa_estimate(const Cocycle& c, const NoncompactnessModel& model, const ErgodicMeasure& mu,
                            int n_max, std::uint64_t seed = 1);

/// max over the family of kappa_estimate, together with the uniform estimate
/// over the family's orbit points.
ExtendedReal global_kappa(const Cocycle& c, const NoncompactnessModel& model, const MeasureFamily& family,
                          int n_max, std::uint64_t seed = 1);

/// Coordinate norm on R^d.
struct VectorNorm {
  enum class Kind { kEuclidean, kWeightedSup };
  Kind kind = Kind::kEuclidean;
  std::vector<double> weights;  // kWeightedSup: |x| = max_i w_i |x_i|

  static VectorNorm euclidean() { return {}; }
  static VectorNorm weighted_sup(std::vector<double> w);
  static VectorNorm sup(int d) { return weighted_sup(std::vector<double>(d, 1.0)); }

  double operator()(const Vector& x) const;
  /// Exact induced operator norm.
  double induced(const Matrix& a) const;
};

/// Strong norm ||.||, weak norm |.| and the coefficient functions of the
/// inequalities ||A(q)x|| <= alpha(q)||x|| + beta(q)|x| and ||A(q)|| <= gamma(q).
struct LasotaYorkeData {
  VectorNorm strong;
  VectorNorm weak;
  std::function<double(const BasePoint&)> alpha;
  std::function<double(const BasePoint&)> beta;
  std::function<double(const BasePoint&)> gamma;
  std::vector<BasePoint> samples;
  std::vector<Vector> test_vectors;
};

struct QuasicompactReport {
  ExtendedReal kappa;          // kappa estimate or bound
  double lambda = 0.0;         // top exponent
  double margin = 0.0;         // lambda - kappa (+inf for kappa = -inf)
  double tolerance = 1e-10;
  double kappa_stderr = 0.0;   // standard error of the Birkhoff estimate
  std::vector<double> ly1_residuals;
  std::vector<double> ly2_residuals;
  double worst_residual = 0.0;
  bool inequalities_hold = true;
  std::string verdict;         // "quasicompact", "inconclusive", "pass", "fail"
};

/// Checks the two inequalities on every (sample, test vector) pair; residuals
/// below -1e-10 fail.
QuasicompactReport check_lasota_yorke(const Cocycle& c, const LasotaYorkeData& data);

/// kappa(mu) <= mean log alpha; verdict quasicompact iff that bound is below
/// lambda_mu - tolerance.
QuasicompactReport kappa_bound_via_ly(const LasotaYorkeData& data, const BaseSystem& system,
                                      const ErgodicMeasure& mu, double lambda_mu, double tolerance = 1e-6,
                                      std::int64_t n = 10000, std::uint64_t seed = 1);

/// kappa vs lambda for one measure.
QuasicompactReport quasicompact_report(const Cocycle& c, const NoncompactnessModel& model,
                                       const ErgodicMeasure& mu, int n_max, double tolerance = 1e-6,
                                       std::uint64_t seed = 1);

}  // namespace sspec
