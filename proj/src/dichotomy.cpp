#include "sspec/dichotomy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "sspec/error.hpp"
#include "sspec/kernels.hpp"

namespace sspec {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kInf = std::numeric_limits<double>::infinity();
// Decay rates are capped here so killed directions still give finite constants.
constexpr double kRateCap = 50.0;

double log_abs(double x) { return x != 0.0 ? std::log(std::fabs(x)) : kNegInf; }

// Decay rate of the finite prefix of e, by least squares.
double envelope_slope(const std::vector<double>& e, int n_max) {
  std::vector<double> prefix;
  for (int n = 0; n <= n_max && n < static_cast<int>(e.size()); ++n) {
    if (!std::isfinite(e[n])) break;
    prefix.push_back(e[n]);
  }
  if (prefix.size() < 2) return kRateCap;
  return std::min(kRateCap, -linalg::regression_slope(prefix));
}

}  // namespace

std::string_view to_string(Reason r) {
  switch (r) {
    case Reason::kOk: return "ok";
    case Reason::kResonant: return "resonant";
    case Reason::kInconsistentDimension: return "inconsistent_dimension";
    case Reason::kDegenerateSplitting: return "degenerate_splitting";
    case Reason::kNotInvertible: return "not_invertible_on_unstable";
    case Reason::kBelowTail: return "below_tail";
    case Reason::kWeakDecay: return "weak_decay";
  }
  return "unknown";
}

nlohmann::json to_json(const DichotomyCertificate& c) {
  return {{"a", c.a},
          {"pass", c.pass},
          {"reason", std::string(to_string(c.reason))},
          {"detail", c.detail},
          {"D", c.D},
          {"lambda", c.lambda},
          {"dim_u", c.dim_u},
          {"n_max", c.n_max},
          {"samples", c.samples},
          {"uh1_worst", c.uh1_worst},
          {"uh2_worst", c.uh2_worst},
          {"recheck_pass", c.recheck_pass}};
}

const Matrix& ProjectionFamily::at(const BasePoint& q) const {
  const PointKey key = point_key(q);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (point_key(samples[i]) == key) return projections[i];
  }
  throw Error(ErrorCode::kInvalidArgument, "point is not a sample of this projection family");
}

DichotomyEngine::DichotomyEngine(Cocycle c, std::vector<BasePoint> samples, DichotomyConfig cfg)
    : c_(std::move(c)), samples_(std::move(samples)), cfg_(cfg) {
  if (cfg_.n_max < 2) throw Error(ErrorCode::kInvalidArgument, "dichotomy horizon must be >= 2");
  if (!(cfg_.margin >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "resonance margin must be >= 0");
  if (cfg_.transient <= 0) cfg_.transient = std::max(64, cfg_.n_max);
  for (const auto& q : samples_) c_.base().check_point(q);
}

double DichotomyEngine::tail_rate() const {
  return c_.model() ? c_.model()->log_tail_per_step() - c_.shift() : kNegInf;
}

std::shared_ptr<const OrbitFrames> DichotomyEngine::frames(const BasePoint& q) const {
  const PointKey key = point_key(q);
  {
    std::lock_guard lock(mutex_);
    if (auto it = frames_.find(key); it != frames_.end()) return it->second;
  }
  auto f = std::make_shared<const OrbitFrames>(c_, q, horizon(), horizon(), cfg_.transient, cfg_.seed);
  std::lock_guard lock(mutex_);
  return frames_.emplace(key, std::move(f)).first->second;
}

void DichotomyEngine::release_frames() const {
  std::lock_guard lock(mutex_);
  frames_.clear();
}

std::vector<double> DichotomyEngine::rates(const BasePoint& q) const {
  const PointKey key = point_key(q);
  {
    std::lock_guard lock(mutex_);
    if (auto it = rates_.find(key); it != rates_.end()) return it->second;
  }
  const Vector r = frames(q)->forward_rates(cfg_.n_max);
  std::vector<double> out(r.data(), r.data() + r.size());
  for (double& x : out) x -= c_.shift();
  std::lock_guard lock(mutex_);
  return rates_.emplace(key, std::move(out)).first->second;
}

GrowthClassification DichotomyEngine::classify(const BasePoint& q, double a, bool backward) const {
  GrowthClassification g;
  g.q = q;
  g.a = a;
  g.rates = rates(q);
  g.tail_rate = tail_rate();
  const int d = c_.dim();
  for (double r : g.rates) {
    if (r > a) ++g.dim_u;
    if (std::fabs(r - a) <= cfg_.margin) g.resonant = true;
  }
  g.dim_s = d - g.dim_u;
  for (int k = 0; k < d; ++k) {
    if ((k < g.dim_u) != (g.rates[k] > a)) g.ordered = false;
  }
  if (g.tail_rate >= a - cfg_.margin) g.resonant = true;

  if (backward && g.dim_u > 0) {
    const auto f = frames(q);
    const int steps = std::min(cfg_.n_max, f->back());
    for (int j = -1; j >= -steps; --j) {
      const Matrix a_j = f->generator(j);
      const Matrix target = f->unstable(j + 1, g.dim_u);
      const Matrix y = a_j.completeOrthogonalDecomposition().solve(target);
      const double res = (a_j * y - target).norm() / target.norm();
      g.backward_residual = std::max(g.backward_residual, res);
    }
    g.backward_extendable = g.backward_residual <= cfg_.backward_tol;
  }
  return g;
}

Splitting DichotomyEngine::splitting(const BasePoint& q, int u, int j) const {
  const int d = c_.dim();
  if (u < 0 || u > d) throw Error(ErrorCode::kInvalidArgument, "unstable dimension out of range");
  const auto f = frames(q);
  Splitting s;
  s.stable = f->stable(j, u);
  s.unstable = f->unstable(j, u);
  Matrix basis(d, d);
  basis << s.stable, s.unstable;
  const Vector sv = linalg::singular_values(basis);
  s.condition = sv(d - 1) > 0.0 ? sv(0) / sv(d - 1) : kInf;
  const Matrix inv = basis.fullPivLu().inverse();
  s.projection = s.stable * inv.topRows(d - u);
  return s;
}

std::shared_ptr<const SplitProfile> DichotomyEngine::profile(const BasePoint& q, int u) const {
  const ProfileKey key{point_key(q), u};
  {
    std::lock_guard lock(mutex_);
    if (auto it = profiles_.find(key); it != profiles_.end()) return it->second;
  }
  const int d = c_.dim();
  const int s = d - u;
  const int h = horizon();
  const double shift = c_.shift();
  const auto f = frames(q);
  auto out = std::make_shared<SplitProfile>();
  out->stable.assign(h + 1, kNegInf);
  out->unstable.assign(h + 1, kNegInf);
  out->inverse.assign(h + 1, kNegInf);

  if (f->exact()) {
    // Coordinate frames: every profile is a max over diagonal entries.
    const Matrix r = f->r(0);
    for (int n = 0; n <= h; ++n) {
      auto grow = [n](double rate) { return n == 0 ? 0.0 : n * rate; };
      for (int k = u; k < d; ++k) out->stable[n] = std::max(out->stable[n], grow(log_abs(r(k, k)) - shift));
      for (int k = 0; k < u; ++k) {
        const double inv_rate = -(log_abs(r(k, k)) - shift);
        out->unstable[n] = std::max(out->unstable[n], grow(inv_rate));
        out->inverse[n] = std::max(out->inverse[n], grow(inv_rate));
      }
    }
    for (int k = 0; k < u; ++k) {
      if (r(k, k) == 0.0) out->invertible = false;
    }
    std::lock_guard lock(mutex_);
    return profiles_.emplace(key, std::move(out)).first->second;
  }

  const Splitting split = splitting(q, u, 0);
  out->condition = split.condition;
  Matrix basis(d, d);
  basis << split.stable, split.unstable;
  const Matrix inv = basis.fullPivLu().inverse();

  if (s > 0) {
    // A(q, n) S_0 = S_n T_{n-1} ... T_0 with T_j = S_{j+1}^T A(q_j) S_j.
    linalg::LogScaledProduct acc(inv.topRows(s));
    out->stable[0] = acc.log_norm();
    Matrix sj = f->stable(0, u);
    for (int n = 1; n <= h; ++n) {
      const Matrix sn = f->stable(n, u);
      acc.left_multiply(sn.transpose() * linalg::multiply(f->generator(n - 1), sj));
      out->stable[n] = acc.log_norm() - shift * n;
      sj = sn;
    }
  }
  if (u > 0) {
    // A(q_j) U_j = U_{j+1} R_j[:u, :u], so backward steps invert triangular blocks.
    linalg::LogScaledProduct back(inv.bottomRows(u));
    out->unstable[0] = back.log_norm();
    for (int n = 1; n <= h; ++n) {
      const Matrix ru = f->r(-n).topLeftCorner(u, u);
      const Vector sv = linalg::singular_values(ru);
      if (!(sv(u - 1) > 0.0) || sv(0) / sv(u - 1) > cfg_.cond_max) out->invertible = false;
      back.left_multiply(ru.triangularView<Eigen::Upper>().solve(Matrix::Identity(u, u)));
      out->unstable[n] = back.log_norm() + shift * n;
    }
    // ||(R_{n-1} ... R_0)^{-1}|| = ||R_{n-1}^{-T} ... R_0^{-T}||.
    linalg::LogScaledProduct fwd(Matrix::Identity(u, u));
    out->inverse[0] = 0.0;
    for (int n = 1; n <= h; ++n) {
      const Matrix ru = f->r(n - 1).topLeftCorner(u, u);
      fwd.left_multiply(ru.transpose().triangularView<Eigen::Lower>().solve(Matrix::Identity(u, u)));
      out->inverse[n] = fwd.log_norm() + shift * n;
    }
  }
  std::lock_guard lock(mutex_);
  return profiles_.emplace(key, std::move(out)).first->second;
}

DichotomyCertificate DichotomyEngine::test(double a) const {
  DichotomyCertificate cert;
  cert.a = a;
  cert.n_max = cfg_.n_max;
  cert.samples = samples_.size();
  auto fail = [&](Reason r, std::string detail) {
    cert.pass = false;
    cert.reason = r;
    cert.detail = std::move(detail);
    return cert;
  };
  if (samples_.empty()) return fail(Reason::kInconsistentDimension, "no samples");

  const double tail = tail_rate();
  if (tail >= a) return fail(Reason::kBelowTail, "shift at or below the tail rate");
  double delta = std::isfinite(tail) ? a - tail : kInf;
  int u = -1;
  for (const auto& q : samples_) {
    const GrowthClassification g = classify(q, a);
    if (g.resonant) return fail(Reason::kResonant, "rate within margin at " + describe(q));
    if (!g.ordered) return fail(Reason::kDegenerateSplitting, "unordered rates at " + describe(q));
    if (u >= 0 && g.dim_u != u) return fail(Reason::kInconsistentDimension, "dim U differs at " + describe(q));
    u = g.dim_u;
    for (double r : g.rates) {
      if (std::isfinite(r)) delta = std::min(delta, std::fabs(r - a));
    }
  }
  cert.dim_u = u;
  cert.delta_min = delta;

  const int h = horizon();
  const auto& k = kernels::active();
  std::vector<double> stable_env(h + 1, kNegInf);
  std::vector<double> unstable_env(h + 1, kNegInf);
  for (const auto& q : samples_) {
    const auto p = profile(q, u);
    if (!(p->condition < cfg_.cond_max)) return fail(Reason::kDegenerateSplitting, "ill-conditioned splitting");
    if (!p->invertible) return fail(Reason::kNotInvertible, "A restricted to U is singular");
    k.max_tilted(stable_env.data(), p->stable.data(), -a, stable_env.size());
    k.max_tilted(unstable_env.data(), p->unstable.data(), a, unstable_env.size());
  }
  if (std::isfinite(tail)) {
    for (int n = 0; n <= h; ++n) stable_env[n] = std::max(stable_env[n], n * (tail - a));
  }
  std::vector<double> env(h + 1);
  for (int n = 0; n <= h; ++n) env[n] = std::max(stable_env[n], unstable_env[n]);

  cert.slope = envelope_slope(env, cfg_.n_max);
  cert.lambda = 0.9 * (std::min({cert.slope, delta, kRateCap}) - cfg_.margin);
  if (!(cert.lambda > cfg_.lambda_min)) return fail(Reason::kWeakDecay, "fitted decay rate too small");

  double log_d = kNegInf;
  for (int n = 0; n <= cfg_.n_max; ++n) log_d = std::max(log_d, env[n] + cert.lambda * n);
  if (!std::isfinite(log_d)) log_d = 0.0;
  cert.D = std::exp(log_d);
  cert.uh1_worst = kNegInf;
  cert.uh2_worst = kNegInf;
  for (int n = 0; n <= cfg_.n_max; ++n) {
    cert.uh1_worst = std::max(cert.uh1_worst, stable_env[n] - (log_d - cert.lambda * n));
    cert.uh2_worst = std::max(cert.uh2_worst, unstable_env[n] - (log_d - cert.lambda * n));
  }
  if (cfg_.recheck) {
    cert.recheck_worst = kNegInf;
    const double log_2d = log_d + std::log(2.0);
    for (int n = 0; n <= h; ++n) cert.recheck_worst = std::max(cert.recheck_worst, env[n] - (log_2d - cert.lambda * n));
    cert.recheck_pass = cert.recheck_worst <= 1e-12;
  }
  cert.pass = true;
  cert.reason = Reason::kOk;
  return cert;
}

ProjectionFamily DichotomyEngine::projections(double a) const {
  ProjectionFamily fam;
  fam.a = a;
  fam.n_max = cfg_.n_max;
  fam.samples = samples_;
  int u = -1;
  for (const auto& q : samples_) {
    const GrowthClassification g = classify(q, a);
    if (g.resonant || !g.ordered || (u >= 0 && g.dim_u != u)) {
      throw Error(ErrorCode::kNoUniformSplitting, "no uniform splitting at a = " + std::to_string(a));
    }
    u = g.dim_u;
  }
  fam.rank = c_.dim() - std::max(u, 0);
  for (const auto& q : samples_) {
    const Splitting s0 = splitting(q, u, 0);
    const Splitting s1 = splitting(q, u, 1);
    const Matrix a0 = frames(q)->generator(0);
    fam.idempotence_defect =
        std::max(fam.idempotence_defect, linalg::op_norm(s0.projection * s0.projection - s0.projection));
    const double scale = std::max(linalg::op_norm(a0), 1e-300);
    fam.equivariance_defect = std::max(
        fam.equivariance_defect, linalg::op_norm(a0 * s0.projection - s1.projection * a0) / scale);
    fam.projections.push_back(s0.projection);
  }
  return fam;
}

bool DichotomyEngine::local_constancy(const DichotomyCertificate& cert) const {
  if (!cert.pass) return false;
  const double eps = std::min(0.01, cert.lambda / 4);
  const auto lo = test(cert.a - eps);
  const auto hi = test(cert.a + eps);
  return lo.pass && hi.pass && lo.dim_u == cert.dim_u && hi.dim_u == cert.dim_u;
}

std::vector<BasePoint> default_samples(const BaseSystem& system, int p_max, std::uint64_t seed) {
  if (system.is_circle()) {
    std::vector<BasePoint> out;
    for (int i = 0; i < 64; ++i) out.push_back(CirclePoint{i / 64.0});
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < 16; ++i) out.push_back(CirclePoint{unif(rng)});
    return out;
  }
  return orbit_points(periodic_measures(system, p_max));
}

GrowthClassification classify_growth(const Cocycle& c, double a, const BasePoint& q, int n_max, double margin) {
  DichotomyConfig cfg;
  cfg.n_max = n_max;
  cfg.margin = margin;
  cfg.recheck = false;
  DichotomyEngine engine(c, {q}, cfg);
  return engine.classify(q, a, true);
}

ProjectionFamily build_projections(const Cocycle& c, double a, const std::vector<BasePoint>& samples, int n_max) {
  DichotomyConfig cfg;
  cfg.n_max = n_max;
  cfg.recheck = false;
  return DichotomyEngine(c, samples, cfg).projections(a);
}

DichotomyCertificate test_uniform_hyperbolicity(const Cocycle& c, double a, const std::vector<BasePoint>& samples,
                                                int n_max) {
  DichotomyConfig cfg;
  cfg.n_max = n_max;
  return DichotomyEngine(c, samples, cfg).test(a);
}

int unstable_dimension(const DichotomyEngine& engine, double a) {
  const auto cert = engine.test(a);
  if (!cert.pass) {
    throw Error(ErrorCode::kNotHyperbolic, "not uniformly hyperbolic at a = " + std::to_string(a) + " (" +
                                               std::string(to_string(cert.reason)) + ")");
  }
  return cert.dim_u;
}

int unstable_dimension(const Cocycle& c, double a, const std::vector<BasePoint>& samples,
                       const DichotomyConfig& cfg) {
  return unstable_dimension(DichotomyEngine(c, samples, cfg), a);
}

}  // namespace sspec
