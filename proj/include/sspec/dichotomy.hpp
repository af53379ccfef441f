#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "sspec/base_dynamics.hpp"
#include "sspec/cocycle.hpp"
#include "sspec/frames.hpp"

namespace sspec {

// Every operation here takes a cocycle c and a shift a and studies
// e^{-a n} A_c(q, n), where A_c already includes c's own shift. For an
// unshifted c this is exactly shifted(c, a).

struct DichotomyConfig {
  int n_max = 128;
  double margin = 5e-4;      // rates within this distance of a are resonant
  double lambda_min = 0.0;   // pass needs fitted lambda > lambda_min
  double cond_max = 1e10;    // splitting basis and A|U conditioning
  double backward_tol = 1e-8;
  bool recheck = true;       // keep profiles to 2 n_max for the doubled-horizon check
  int transient = 0;         // 0: max(64, n_max)
  std::uint64_t seed = 7;
};

struct GrowthClassification {
  BasePoint q;
  double a = 0.0;
  int dim_s = 0;
  int dim_u = 0;
  std::vector<double> rates;  // per direction, decreasing; -inf for killed
  double tail_rate = 0.0;     // operator-model tail, -inf in finite dimension
  bool resonant = false;
  bool ordered = true;        // unstable rates are the leading frame directions
  double backward_residual = 0.0;
  bool backward_extendable = true;
};

struct Splitting {
  Matrix stable;      // orthonormal basis of Im P
  Matrix unstable;    // orthonormal basis of Ker P
  Matrix projection;  // P
  double condition = 1.0;  // of [stable unstable]
};

struct ProjectionFamily {
  double a = 0.0;
  int n_max = 0;
  int rank = 0;
  std::vector<BasePoint> samples;
  std::vector<Matrix> projections;
  double idempotence_defect = 0.0;   // max ||P^2 - P||
  double equivariance_defect = 0.0;  // max ||A P(q) - P(f q) A|| / ||A||

  /// P at a sample (matched by identity of the point).
  const Matrix& at(const BasePoint& q) const;
};

enum class Reason {
  kOk,
  kResonant,
  kInconsistentDimension,
  kDegenerateSplitting,
  kNotInvertible,
  kBelowTail,
  kWeakDecay,
};

std::string_view to_string(Reason r);

struct DichotomyCertificate {
  double a = 0.0;
  bool pass = false;
  Reason reason = Reason::kOk;
  std::string detail;
  double D = 0.0;
  double lambda = 0.0;
  double slope = 0.0;      // fitted decay rate of the envelope
  double delta_min = 0.0;  // smallest distance of a rate from a
  int dim_u = -1;
  int n_max = 0;
  std::size_t samples = 0;
  double uh1_worst = 0.0;  // max_n log||A(q,n)P|| - (log D - lambda n)
  double uh2_worst = 0.0;  // same for the backward unstable side
  bool recheck_pass = false;
  double recheck_worst = 0.0;  // against 2D up to 2 n_max
};

nlohmann::json to_json(const DichotomyCertificate& c);

/// Per-point log-norm profiles for a fixed unstable dimension u, indexed by
/// n = 0 .. horizon. Shift of c applied, no extra a.
struct SplitProfile {
  std::vector<double> stable;    // log ||A_c(q, n) P(q)||
  std::vector<double> unstable;  // log ||A_c(q, -n) (Id - P(q))||
  std::vector<double> inverse;   // log ||(A_c(q, n)|U(q))^{-1}||
  double condition = 1.0;
  bool invertible = true;        // A restricted to U well conditioned
};

/// Frame and profile cache shared by all shifts tested on one cocycle.
class DichotomyEngine {
 public:
  DichotomyEngine(Cocycle c, std::vector<BasePoint> samples, DichotomyConfig cfg = {});

  const Cocycle& cocycle() const { return c_; }
  const std::vector<BasePoint>& samples() const { return samples_; }
  const DichotomyConfig& config() const { return cfg_; }
  int horizon() const { return cfg_.recheck ? 2 * cfg_.n_max : cfg_.n_max; }

  std::shared_ptr<const OrbitFrames> frames(const BasePoint& q) const;

  /// Forward rates of A_c over [0, n_max), per frame direction.
  std::vector<double> rates(const BasePoint& q) const;

  /// Rate-based classification; `backward` adds the least-squares
  /// extendability check of the unstable candidates.
  GrowthClassification classify(const BasePoint& q, double a, bool backward = false) const;

  /// Splitting with unstable dimension u at step j of q's frame run.
  Splitting splitting(const BasePoint& q, int u, int j = 0) const;

  std::shared_ptr<const SplitProfile> profile(const BasePoint& q, int u) const;

  DichotomyCertificate test(double a) const;

  ProjectionFamily projections(double a) const;

  /// a -/+ eps pass with the same dim U, eps = min(0.01, lambda / 4).
  bool local_constancy(const DichotomyCertificate& cert) const;

  /// Drops cached frames (profiles stay).
  void release_frames() const;

 private:
  double tail_rate() const;

  Cocycle c_;
  std::vector<BasePoint> samples_;
  DichotomyConfig cfg_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<PointKey, std::shared_ptr<const OrbitFrames>, PointKeyHash> frames_;
  mutable std::unordered_map<PointKey, std::vector<double>, PointKeyHash> rates_;
  struct ProfileKey {
    PointKey point;
    int u = 0;
    bool operator==(const ProfileKey&) const = default;
  };
  struct ProfileKeyHash {
    std::size_t operator()(const ProfileKey& k) const noexcept { return PointKeyHash{}(k.point) * 131u + k.u; }
  };
  mutable std::unordered_map<ProfileKey, std::shared_ptr<const SplitProfile>, ProfileKeyHash> profiles_;
};

/// Default uniformity samples: every periodic point of period <= p_max on
/// shifts and finite orbits; a 64-point grid plus 16 seeded random angles on
/// rotations.
std::vector<BasePoint> default_samples(const BaseSystem& system, int p_max, std::uint64_t seed = 1);

GrowthClassification classify_growth(const Cocycle& c, double a, const BasePoint& q, int n_max,
                                     double margin = 5e-4);

ProjectionFamily build_projections(const Cocycle& c, double a, const std::vector<BasePoint>& samples, int n_max);

DichotomyCertificate test_uniform_hyperbolicity(const Cocycle& c, double a, const std::vector<BasePoint>& samples,
                                                int n_max);

/// dim U at a passing shift; throws kNotHyperbolic otherwise.
int unstable_dimension(const Cocycle& c, double a, const std::vector<BasePoint>& samples,
                       const DichotomyConfig& cfg = {});
int unstable_dimension(const DichotomyEngine& engine, double a);

}  // namespace sspec
