#include "sspec/jps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "sspec/error.hpp"
#include "sspec/lyapunov.hpp"

namespace sspec {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kInf = std::numeric_limits<double>::infinity();

double log_op_norm(const Matrix& m) {
  const double n = linalg::op_norm(m);
  return n > 0.0 ? std::log(n) : kNegInf;
}

// F_{n+m} - F_m - F_n with the -inf conventions of a log-norm.
double excess(double whole, double head, double tail) {
  if (whole == kNegInf) return kNegInf;
  if (head == kNegInf || tail == kNegInf) return kInf;
  return whole - head - tail;
}

Window frame_window(const DichotomyEngine& engine) {
  const std::int64_t reach = engine.horizon() + engine.config().transient;
  return Window{reach, reach + engine.cocycle().generator().lookahead()};
}

}  // namespace

SubadditiveSequence::SubadditiveSequence(std::string tag, BaseSystem system, Eval eval, Window window, Slack slack)
    : tag_(std::move(tag)),
      system_(std::move(system)),
      eval_(std::move(eval)),
      window_(window),
      slack_(std::move(slack)) {
  if (!eval_) throw Error(ErrorCode::kInvalidArgument, "subadditive sequence needs an evaluator");
}

double SubadditiveSequence::operator()(const BasePoint& q, int n) const {
  if (n < 0) throw Error(ErrorCode::kInvalidArgument, "sequence index must be >= 0");
  const Key key{point_key(q), n};
  {
    std::lock_guard lock(*mutex_);
    if (auto it = cache_->find(key); it != cache_->end()) return it->second;
  }
  const double v = eval_(q, n);
  std::lock_guard lock(*mutex_);
  cache_->emplace(key, v);
  return v;
}

double SubadditiveSequence::slack(const BasePoint& q, int n, int m) const {
  return slack_ ? slack_(q, n, m) : 0.0;
}

SubadditiveSequence projected_norm_sequence(const Cocycle& c, ProjectionMap p, double shift) {
  if (!p) throw Error(ErrorCode::kInvalidArgument, "projection map is empty");
  const Cocycle cs = c.with_shift(shift);
  auto eval = [cs, p](const BasePoint& q, int n) {
    const Matrix pq = p(q);
    const double direct = log_op_norm(linalg::multiply(cs.product(q, n), pq));
    if (std::isfinite(direct) || linalg::op_norm(pq) == 0.0) return direct;
    // Overflow or underflow of the plain product: redo it with rescaling.
    linalg::LogScaledProduct acc(pq);
    BasePoint x = q;
    for (int i = 0; i < n; ++i) {
      acc.left_multiply(cs.generator_at(x));
      x = iterate(cs.base(), x, 1);
    }
    return acc.log_norm() - cs.shift() * n;
  };
  auto slack = [cs, p, eval](const BasePoint& q, int n, int m) {
    // A(q,n+m)P(q) = A(f^n q,m)P(f^n q) A(q,n)P(q) + A(f^n q,m)(Id - P(f^n q)) A(q,n)P(q).
    const BasePoint qn = iterate(cs.base(), q, n);
    const Matrix an = cs.product(q, n);
    const Matrix pn = p(qn);
    const Matrix leak = (Matrix::Identity(pn.rows(), pn.cols()) - pn) * an * p(q);
    const double delta = linalg::op_norm(leak);
    if (delta == 0.0) return 0.0;
    const double fn = eval(q, n);
    const double fm = eval(qn, m);
    if (fn == kNegInf || fm == kNegInf) return kInf;
    return std::log1p(linalg::op_norm(cs.product(qn, m)) * delta * std::exp(-fm - fn));
  };
  return SubadditiveSequence("projected_norm", c.base(), eval, Window{0, c.generator().lookahead()}, slack);
}

SubadditiveSequence projected_norm_sequence(const Cocycle& c, const ProjectionFamily& p, double shift) {
  auto fam = std::make_shared<ProjectionFamily>(p);
  return projected_norm_sequence(c, [fam](const BasePoint& q) { return fam->at(q); }, shift);
}

SubadditiveSequence stable_profile_sequence(const DichotomyEngine& engine, int u) {
  auto eval = [&engine, u](const BasePoint& q, int n) {
    if (n > engine.horizon()) throw Error(ErrorCode::kInvalidArgument, "index beyond the frame horizon");
    return engine.profile(q, u)->stable[static_cast<std::size_t>(n)];
  };
  return SubadditiveSequence("stable_profile", engine.cocycle().base(), eval, frame_window(engine));
}

SubadditiveSequence inverse_profile_sequence(const DichotomyEngine& engine, int u) {
  auto eval = [&engine, u](const BasePoint& q, int n) {
    if (n > engine.horizon()) throw Error(ErrorCode::kInvalidArgument, "index beyond the frame horizon");
    return engine.profile(q, u)->inverse[static_cast<std::size_t>(n)];
  };
  return SubadditiveSequence("inverse_profile", engine.cocycle().base(), eval, frame_window(engine));
}

SubadditiveSequence ic_log_norm_sequence(const Cocycle& c, const NoncompactnessModel& model) {
  const double t = model.is_finite_dim() ? kNegInf : model.log_tail_per_step() - c.shift();
  auto eval = [t](const BasePoint&, int n) { return n == 0 ? (t == kNegInf ? kNegInf : 0.0) : n * t; };
  return SubadditiveSequence("ic_log_norm", c.base(), eval);
}

SubadditivityReport check_subadditivity(const SubadditiveSequence& seq, const std::vector<BasePoint>& samples,
                                        int n_budget, std::uint64_t seed) {
  if (n_budget < 2) throw Error(ErrorCode::kInvalidArgument, "n_budget must be >= 2");
  std::vector<std::pair<int, int>> pairs;
  for (int n = 1; n < n_budget; ++n) {
    for (int m = 1; n + m <= n_budget; ++m) pairs.emplace_back(n, m);
  }
  constexpr std::size_t kMaxTriples = 20000;
  const std::size_t per_sample =
      samples.empty() ? 0 : std::max<std::size_t>(1, std::min(pairs.size(), kMaxTriples / samples.size()));
  std::mt19937_64 rng(seed);
  SubadditivityReport out;
  out.max_violation = kNegInf;
  out.max_adjusted = kNegInf;
  for (const auto& q : samples) {
    if (per_sample < pairs.size()) std::shuffle(pairs.begin(), pairs.end(), rng);
    for (std::size_t i = 0; i < per_sample; ++i) {
      const auto [n, m] = pairs[i];
      const BasePoint qn = iterate(seq.system(), q, n);
      const double v = excess(seq(q, n + m), seq(qn, m), seq(q, n));
      out.max_violation = std::max(out.max_violation, v);
      out.max_adjusted = std::max(out.max_adjusted, v > 0.0 ? v - seq.slack(q, n, m) : v);
      ++out.triples;
    }
  }
  return out;
}

LambdaEstimate lambda_mu(const SubadditiveSequence& seq, const ErgodicMeasure& mu, int n_max, std::uint64_t seed) {
  if (n_max < 8) throw Error(ErrorCode::kInvalidArgument, "lambda_mu needs n_max >= 8");
  Window w = seq.window();
  w.lookahead += n_max;
  const auto points = typical_points(mu, seq.system(), 8, seed, w);
  LambdaEstimate out;
  out.points = points.size();
  out.value = kInf;
  for (int n : {n_max / 4, n_max / 2, n_max}) {
    double total = 0.0;
    for (const auto& q : points) total += seq(q, n);
    out.value = std::min(out.value, total / (static_cast<double>(points.size()) * n));
  }
  out.along_orbit = seq(points.front(), n_max) / n_max;
  out.max_point = kNegInf;
  for (const auto& q : points) out.max_point = std::max(out.max_point, seq(q, n_max) / n_max);
  out.discrepancy = std::isfinite(out.value) ? std::fabs(out.along_orbit - out.value) : 0.0;
  return out;
}

CaoResult cao_maximize(const SubadditiveSequence& seq, const MeasureFamily& family,
                       const std::vector<BasePoint>& samples, int n_max, std::uint64_t seed) {
  if (family.empty()) throw Error(ErrorCode::kInvalidArgument, "measure family is empty");
  CaoResult out;
  out.n_max = n_max;
  out.l_hat = kNegInf;
  out.max_lambda = kNegInf;
  for (const auto& q : samples) out.l_hat = std::max(out.l_hat, seq(q, n_max) / n_max);
  for (const auto& m : family.members()) {
    MeasureValue v{m.label, lambda_mu(seq, m.measure, n_max, seed)};
    out.l_hat = std::max(out.l_hat, v.estimate.max_point);
    if (out.argmax.empty() || v.estimate.value > out.max_lambda) {
      out.max_lambda = v.estimate.value;
      out.argmax = m.label;
    }
    out.values.push_back(std::move(v));
  }
  out.degenerate = out.max_lambda == kNegInf && out.l_hat == kNegInf;
  out.gap = out.degenerate ? 0.0 : out.l_hat - out.max_lambda;
  return out;
}

namespace {

struct ShiftEval {
  bool ok = false;
  double shift = 0.0;
  int dim_u = -1;
  double value = 0.0;  // endpoint estimate from this shift
  double lambda = 0.0; // max Lambda of the sequence
  CaoResult cao;
  std::vector<std::pair<int, double>> growth;
};

ShiftEval evaluate_at(const DichotomyEngine& engine, const MeasureFamily& family, double shift, bool upper,
                      const JpsConfig& cfg) {
  ShiftEval e;
  e.shift = shift;
  const auto cert = engine.test(shift);
  if (!cert.pass) return e;
  e.dim_u = cert.dim_u;
  const int d = engine.cocycle().dim();
  if ((upper && cert.dim_u == d && !engine.cocycle().model()) || (!upper && cert.dim_u == 0)) return e;
  const SubadditiveSequence seq =
      upper ? stable_profile_sequence(engine, cert.dim_u) : inverse_profile_sequence(engine, cert.dim_u);
  e.cao = cao_maximize(seq, family, engine.samples(), cfg.n_max, cfg.seed);
  if (e.cao.degenerate) return e;
  e.lambda = e.cao.max_lambda;
  e.value = upper ? e.lambda : -e.lambda;
  e.ok = std::isfinite(e.value);
  const auto* nu = family.find(e.cao.argmax);
  Window w = seq.window();
  w.lookahead += cfg.n_max;
  const BasePoint q = typical_points(nu->measure, seq.system(), 8, cfg.seed, w).front();
  for (int n = 1; n <= cfg.n_max; n *= 2) {
    const double f = seq(q, n) / n;
    e.growth.emplace_back(n, upper ? f : -f);
  }
  return e;
}

double nearest(const LyapunovSpectrum& s, double x) {
  double best = kInf;
  for (const auto& g : s.exponents) {
    if (std::fabs(g.lambda - x) < std::fabs(best - x)) best = g.lambda;
  }
  for (double r : s.raw) {
    if (std::isfinite(r) && std::fabs(r - x) < std::fabs(best - x)) best = r;
  }
  return best;
}

}  // namespace

std::vector<EndpointRealization> verify_endpoints(const DichotomyEngine& engine, const SpectrumResult& r,
                                                  const MeasureFamily& family, const JpsConfig& cfg) {
  if (family.empty()) throw Error(ErrorCode::kInvalidArgument, "measure family is empty");
  if (engine.horizon() < cfg.n_max) throw Error(ErrorCode::kInvalidArgument, "engine horizon below the JPS n_max");
  const Cocycle& c = engine.cocycle();
  const double tol = r.tolerance;
  const double near_kappa = engine.config().margin + tol;

  std::map<std::string, LyapunovSpectrum> ladders;
  auto ladder = [&](const LabeledMeasure& m) -> const LyapunovSpectrum& {
    auto it = ladders.find(m.label);
    if (it == ladders.end()) {
      it = ladders.emplace(m.label, exponent_ladder(c, m.measure, cfg.n_max, cfg.resolution, cfg.seed, m.label))
               .first;
    }
    return it->second;
  };

  std::vector<EndpointRealization> out;
  for (const auto& iv : r.intervals) {
    for (const bool upper : {true, false}) {
      EndpointRealization e;
      e.side = upper ? "upper" : "lower";
      e.value = upper ? iv.hi : iv.lo;
      if ((!upper && iv.tail) ||
          (r.kappa.is_finite() && e.value - r.kappa.value() <= near_kappa)) {
        e.verdict = "skipped";
        e.reason = "too close to kappa";
        out.push_back(e);
        continue;
      }
      // Nearest passing scan point on the resolvent side.
      double neighbour = upper ? kInf : -kInf;
      for (const auto& p : r.trace) {
        if (!p.pass) continue;
        if (upper && p.a > e.value) neighbour = std::min(neighbour, p.a);
        if (!upper && p.a < e.value) neighbour = std::max(neighbour, p.a);
      }
      const double half = std::isfinite(neighbour) ? 0.5 * std::fabs(neighbour - e.value) : r.grid_step;
      e.eps = std::max(2.0 * tol, half);
      const double sign = upper ? 1.0 : -1.0;

      ShiftEval far = evaluate_at(engine, family, e.value + sign * e.eps, upper, cfg);
      if (!far.ok && std::isfinite(neighbour)) {
        far = evaluate_at(engine, family, neighbour, upper, cfg);
        e.eps = std::fabs(neighbour - e.value);
      }
      if (!far.ok) {
        e.verdict = "fail";
        e.reason = "no hyperbolic shift found next to the endpoint";
        out.push_back(e);
        continue;
      }
      const ShiftEval close = evaluate_at(engine, family, e.value + sign * e.eps / 2, upper, cfg);
      const bool pair = close.ok && close.dim_u == far.dim_u;
      e.refined = pair ? 2.0 * close.value - far.value : far.value;
      const ShiftEval& used = pair ? close : far;
      e.cao_gap = used.cao.gap;
      e.matched_measure = used.cao.argmax;
      e.growth = used.growth;
      e.lower_bound_ok = (upper ? used.lambda : e.refined) >= iv.lo - tol;

      auto judge = [&](const LabeledMeasure& m) {
        const double x = nearest(ladder(m), e.refined);
        return std::make_pair(x, std::max(std::fabs(e.refined - x), std::fabs(e.value - x)));
      };
      const LabeledMeasure* nu = family.find(e.matched_measure);
      auto [exponent, worst] = judge(*nu);
      if (!(worst <= cfg.match_tolerance)) {
        for (const auto& m : family.members()) {
          const auto [x, w] = judge(m);
          if (w < worst) {
            worst = w;
            exponent = x;
            e.matched_measure = m.label;
          }
        }
      }
      e.exponent = exponent;
      e.residual = std::fabs(e.refined - exponent);
      e.scan_residual = std::fabs(e.value - exponent);
      const bool matched = e.residual <= cfg.match_tolerance && e.scan_residual <= cfg.match_tolerance;
      e.verdict = matched && e.lower_bound_ok ? "pass" : "fail";
      if (!matched) e.reason = "no family exponent within the match tolerance";
      else if (!e.lower_bound_ok) e.reason = "Lambda below the interval's lower end";
      out.push_back(e);
    }
  }
  return out;
}

std::vector<EndpointRealization> verify_endpoints(const Cocycle& c, const SpectrumResult& r,
                                                  const MeasureFamily& family, const JpsConfig& cfg, int p_max) {
  DichotomyConfig dc;
  dc.n_max = cfg.n_max;
  dc.recheck = false;
  const DichotomyEngine engine(c, default_samples(c.base(), p_max, cfg.seed), dc);
  return verify_endpoints(engine, r, family, cfg);
}

nlohmann::json to_json(const CaoResult& r) {
  nlohmann::json values = nlohmann::json::array();
  for (const auto& v : r.values) {
    values.push_back({{"measure", v.label},
                      {"lambda", v.estimate.value},
                      {"along_orbit", v.estimate.along_orbit},
                      {"discrepancy", v.estimate.discrepancy}});
  }
  return {{"l_hat", r.l_hat}, {"argmax", r.argmax}, {"max_lambda", r.max_lambda},
          {"gap", r.gap},     {"degenerate", r.degenerate}, {"n_max", r.n_max}, {"values", values}};
}

nlohmann::json to_json(const EndpointRealization& e) {
  return {{"value", e.value},
          {"side", e.side},
          {"refined", e.refined},
          {"matched_measure", e.matched_measure},
          {"exponent", e.exponent},
          {"residual", e.residual},
          {"scan_residual", e.scan_residual},
          {"lower_bound_ok", e.lower_bound_ok},
          {"verdict", e.verdict},
          {"reason", e.reason},
          {"cao_gap", e.cao_gap},
          {"eps", e.eps},
          {"growth", e.growth}};
}

}  // namespace sspec
