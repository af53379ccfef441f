#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "sspec/base_dynamics.hpp"
#include "sspec/cocycle.hpp"
#include "sspec/dichotomy.hpp"
#include "sspec/noncompactness_model.hpp"
#include "sspec/spectrum.hpp"

namespace sspec {

/// (q, n) -> F_n(q) with a per-(q, n) cache. -inf is a legal value.
class SubadditiveSequence {
 public:
  using Eval = std::function<double(const BasePoint&, int)>;
  /// Upper bound for F_{n+m}(q) - F_m(f^n q) - F_n(q) caused by inexact
  /// projections; absent means 0.
  using Slack = std::function<double(const BasePoint&, int, int)>;

  SubadditiveSequence(std::string tag, BaseSystem system, Eval eval, Window window = {}, Slack slack = {});

  double operator()(const BasePoint& q, int n) const;
  double slack(const BasePoint& q, int n, int m) const;

  const std::string& tag() const { return tag_; }
  const BaseSystem& system() const { return system_; }
  /// Window a mu-typical point needs for evaluation.
  const Window& window() const { return window_; }

 private:
  struct Key {
    PointKey point;
    int n = 0;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept { return PointKeyHash{}(k.point) * 1000003u + k.n; }
  };

  std::string tag_;
  BaseSystem system_;
  Eval eval_;
  Window window_;
  Slack slack_;
  std::shared_ptr<std::mutex> mutex_ = std::make_shared<std::mutex>();
  std::shared_ptr<std::unordered_map<Key, double, KeyHash>> cache_ =
      std::make_shared<std::unordered_map<Key, double, KeyHash>>();
};

using ProjectionMap = std::function<Matrix(const BasePoint&)>;

/// F_n(q) = log ||A_shift(q, n) P(q)|| by direct multiplication. The slack
/// term bounds the subadditivity defect from ||(Id - P(f^n q)) A(q, n) P(q)||.
SubadditiveSequence projected_norm_sequence(const Cocycle& c, ProjectionMap p, double shift);
SubadditiveSequence projected_norm_sequence(const Cocycle& c, const ProjectionFamily& p, double shift);

/// F_n(q) = log ||A_c(q, n) P(q)|| from the stable frame profile of unstable
/// dimension u (stable for any n up to the engine horizon).
SubadditiveSequence stable_profile_sequence(const DichotomyEngine& engine, int u);

/// G_n(q) = log ||(A_c(q, n)|U(q))^{-1}||, the lower-endpoint counterpart.
SubadditiveSequence inverse_profile_sequence(const DichotomyEngine& engine, int u);

/// F_n(q) = log of the noncompactness bound of A(q, n); -inf in finite dimension.
SubadditiveSequence ic_log_norm_sequence(const Cocycle& c, const NoncompactnessModel& model);

struct SubadditivityReport {
  double max_violation = 0.0;  // raw F_{n+m} - F_m - F_n
  double max_adjusted = 0.0;   // minus the slack bound
  std::size_t triples = 0;
};

/// Max violation over sampled (q, n, m), n, m >= 1, n + m <= n_budget.
SubadditivityReport check_subadditivity(const SubadditiveSequence& seq, const std::vector<BasePoint>& samples,
                                        int n_budget, std::uint64_t seed = 1);

struct LambdaEstimate {
  double value = 0.0;         // min over n in {N/4, N/2, N} of (1/n) mean F_n
  double along_orbit = 0.0;   // (1/N) F_N(q_0)
  double discrepancy = 0.0;
  double max_point = 0.0;     // (1/N) max F_N over the points used
  std::size_t points = 0;
};

LambdaEstimate lambda_mu(const SubadditiveSequence& seq, const ErgodicMeasure& mu, int n_max, std::uint64_t seed = 1);

struct MeasureValue {
  std::string label;
  LambdaEstimate estimate;
};

struct CaoResult {
  double l_hat = 0.0;  // (1/N) max F_N over samples and every evaluated point
  std::vector<MeasureValue> values;
  std::string argmax;
  double max_lambda = 0.0;
  double gap = 0.0;
  bool degenerate = false;  // every value -inf
  int n_max = 0;
};

CaoResult cao_maximize(const SubadditiveSequence& seq, const MeasureFamily& family,
                       const std::vector<BasePoint>& samples, int n_max, std::uint64_t seed = 1);

struct JpsConfig {
  int n_max = 1024;
  double match_tolerance = 1e-2;
  double resolution = 0.05;  // ladder clustering for matching
  std::uint64_t seed = 1;
  int threads = 0;
};

struct EndpointRealization {
  double value = 0.0;    // scanned endpoint
  std::string side;      // "upper" or "lower"
  double refined = 0.0;  // extrapolated max Lambda
  std::string matched_measure;
  double exponent = 0.0;
  double residual = 0.0;       // |refined - exponent|
  double scan_residual = 0.0;  // |value - exponent|
  bool lower_bound_ok = true;  // Lambda(nu) >= a_m - tolerance
  std::string verdict;         // "pass", "fail", "skipped"
  std::string reason;
  double cao_gap = 0.0;
  double eps = 0.0;
  std::vector<std::pair<int, double>> growth;  // (n, +-(1/n) F_n) at the maximizer, dyadic n
};

/// For every endpoint: dichotomy at a nearby resolvent shift, Cao
/// maximization of the projected growth, and a match against the exponent
/// ladder of the maximizing measure (then of every family member).
std::vector<EndpointRealization> verify_endpoints(const DichotomyEngine& engine, const SpectrumResult& r,
                                                  const MeasureFamily& family, const JpsConfig& cfg = {});
std::vector<EndpointRealization> verify_endpoints(const Cocycle& c, const SpectrumResult& r,
                                                  const MeasureFamily& family, const JpsConfig& cfg = {},
                                                  int p_max = 8);

nlohmann::json to_json(const CaoResult& r);
nlohmann::json to_json(const EndpointRealization& e);

}  // namespace sspec
