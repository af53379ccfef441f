#include "sspec/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sspec/error.hpp"
#include "sspec/parallel.hpp"

namespace sspec {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ScanPoint run_test(const DichotomyEngine& engine, double a) {
  const DichotomyCertificate cert = engine.test(a);
  return ScanPoint{a, cert.pass, cert.pass ? cert.dim_u : -1, cert.reason, cert.lambda, cert.D, cert.recheck_pass};
}

void test_all(const DichotomyEngine& engine, const std::vector<double>& shifts, std::vector<ScanPoint>& trace,
              int threads) {
  std::vector<ScanPoint> fresh(shifts.size());
  parallel_for(shifts.size(), [&](std::size_t i) { fresh[i] = run_test(engine, shifts[i]); }, threads);
  trace.insert(trace.end(), fresh.begin(), fresh.end());
  std::sort(trace.begin(), trace.end(), [](const ScanPoint& x, const ScanPoint& y) { return x.a < y.a; });
}

bool bracket(const ScanPoint& x, const ScanPoint& y) {
  return x.pass != y.pass || (x.pass && y.pass && x.dim_u != y.dim_u);
}

double default_floor(const DichotomyEngine& engine, double upper) {
  const Cocycle& c = engine.cocycle();
  double lo = kInf;
  for (const auto& q : engine.samples()) {
    const Vector sv = linalg::singular_values(c.generator_at(q));
    for (Eigen::Index k = sv.size() - 1; k >= 0; --k) {
      if (sv(k) > 0.0) {
        lo = std::min(lo, std::log(sv(k)) - c.shift());
        break;
      }
    }
  }
  return std::isfinite(lo) ? lo - 0.1 : upper - 1.0;
}

int dim_in(const SpectrumResult& r, double lo, double hi) {
  const double mid = std::isfinite(lo) && std::isfinite(hi) ? 0.5 * (lo + hi) : (std::isfinite(lo) ? lo : hi);
  int best = -1;
  double dist = kInf;
  for (const auto& p : r.trace) {
    if (p.pass && p.a > lo && p.a < hi && std::fabs(p.a - mid) < dist) {
      dist = std::fabs(p.a - mid);
      best = p.dim_u;
    }
  }
  return best;
}

}  // namespace

void ScanConfig::validate() const {
  if (!(grid_step > 0.0)) throw Error(ErrorCode::kInvalidArgument, "grid step must be > 0");
  if (!(tolerance > 0.0)) throw Error(ErrorCode::kInvalidArgument, "bisection tolerance must be > 0");
  if (!(grid_step > 2.0 * dichotomy.margin)) {
    throw Error(ErrorCode::kInvalidArgument, "grid step must exceed twice the resonance margin");
  }
  if (interval_budget < 1) throw Error(ErrorCode::kInvalidArgument, "interval budget must be >= 1");
  if (p_max < 1) throw Error(ErrorCode::kInvalidArgument, "p_max must be >= 1");
}

SpectrumResult scan_spectrum(const Cocycle& c, const ScanConfig& cfg) {
  cfg.validate();
  const DichotomyEngine engine(c, default_samples(c.base(), cfg.p_max, cfg.seed), cfg.dichotomy);
  return scan_spectrum(engine, cfg);
}

SpectrumResult scan_spectrum(const DichotomyEngine& engine, const ScanConfig& cfg) {
  cfg.validate();
  const Cocycle& c = engine.cocycle();
  SpectrumResult r;
  r.kappa = cfg.kappa;
  r.grid_step = cfg.grid_step;
  r.tolerance = cfg.tolerance;
  r.log_c = std::log(uniform_norm_bound(c, cfg.norm_budget).value);
  r.upper_end = r.log_c + 0.1;
  const double floor = cfg.floor ? *cfg.floor : default_floor(engine, r.upper_end);
  r.lower_end = cfg.kappa.is_finite() ? std::max(cfg.kappa.value() + cfg.tolerance, floor) : floor;
  if (!(r.lower_end < r.upper_end)) r.lower_end = r.upper_end - cfg.grid_step;

  std::vector<double> grid;
  for (int i = 0;; ++i) {
    const double a = r.lower_end + i * cfg.grid_step;
    if (a >= r.upper_end) break;
    grid.push_back(a);
  }
  grid.push_back(r.upper_end);
  test_all(engine, grid, r.trace, cfg.threads);

  // Brackets are bisected to the tolerance. Failing runs are subdivided down
  // to the resonance resolution, which separates point spectra closer than
  // the grid step.
  const double resolvable = std::max(4.0 * cfg.dichotomy.margin, 2.0 * cfg.tolerance);
  for (;;) {
    std::vector<double> mids;
    for (std::size_t i = 0; i + 1 < r.trace.size(); ++i) {
      const auto& x = r.trace[i];
      const auto& y = r.trace[i + 1];
      const double w = y.a - x.a;
      if ((bracket(x, y) && w > cfg.tolerance) || (!x.pass && !y.pass && w > resolvable)) {
        mids.push_back(0.5 * (x.a + y.a));
      }
    }
    if (mids.empty()) break;
    test_all(engine, mids, r.trace, cfg.threads);
  }

  // Failing runs become intervals; unresolved dimension jumps become points.
  std::vector<SpectralInterval> found;
  const std::size_t n = r.trace.size();
  for (std::size_t i = 0; i < n;) {
    if (r.trace[i].pass) {
      if (i + 1 < n && r.trace[i + 1].pass && r.trace[i].dim_u != r.trace[i + 1].dim_u) {
        const double m = 0.5 * (r.trace[i].a + r.trace[i + 1].a);
        found.push_back({m, m, false});
      }
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && !r.trace[j + 1].pass) ++j;
    SpectralInterval iv;
    if (i == 0) {
      if (cfg.kappa.is_finite()) {
        iv.lo = cfg.kappa.value();
        iv.tail = true;
        r.lower_tail = true;
      } else {
        iv.lo = r.trace[0].a;
      }
    } else {
      iv.lo = 0.5 * (r.trace[i - 1].a + r.trace[i].a);
    }
    iv.hi = j + 1 < n ? 0.5 * (r.trace[j].a + r.trace[j + 1].a) : r.trace[j].a;
    if (!iv.tail && iv.hi - iv.lo <= 2.0 * cfg.tolerance) iv.lo = iv.hi = 0.5 * (iv.lo + iv.hi);
    found.push_back(iv);
    i = j + 1;
  }
  std::sort(found.begin(), found.end(), [](const auto& x, const auto& y) { return x.hi > y.hi; });
  if (static_cast<int>(found.size()) > cfg.interval_budget) {
    found.resize(static_cast<std::size_t>(cfg.interval_budget));
    r.truncated = true;
    r.lower_tail = std::any_of(found.begin(), found.end(), [](const auto& iv) { return iv.tail; });
  }
  r.intervals = found;

  // Resolvent gaps, increasing in a. Below a truncated list there is
  // unreported spectrum, so no gap is claimed there.
  const double bottom = cfg.kappa.is_finite() ? cfg.kappa.value() : -kInf;
  double lo = bottom;
  for (auto it = r.intervals.rbegin(); it != r.intervals.rend(); ++it) {
    const bool lowest = it == r.intervals.rbegin();
    if (!it->tail && !(lowest && r.truncated)) r.gaps.push_back({lo, it->lo, dim_in(r, lo, it->lo)});
    lo = it->hi;
  }
  r.gaps.push_back({lo, kInf, dim_in(r, lo, kInf)});

  const StructureClass s = classify_structure(r);
  r.alternative = s.alternative;
  r.suspected_alternative = s.suspected;
  r.accumulation_suspected = s.suspected != 0;
  r.b_inf = s.b_inf;
  return r;
}

StructureClass classify_structure(const SpectrumResult& r) {
  StructureClass s;
  const auto& iv = r.intervals;
  s.alternative = iv.empty() ? 1 : (r.lower_tail ? 3 : 2);

  // Gaps between consecutive intervals must shrink toward kappa (up to the
  // bracket noise of one tolerance per endpoint) and end below 3 tolerances.
  bool shrinking = false;
  if (iv.size() >= 3) {
    shrinking = true;
    double prev = kInf;
    for (std::size_t i = 0; i + 1 < iv.size(); ++i) {
      const double gap = iv[i].lo - iv[i + 1].hi;
      if (gap > prev + 2.0 * r.tolerance) shrinking = false;
      prev = gap;
    }
    shrinking = shrinking && prev < 3.0 * r.tolerance;
  }
  std::ostringstream desc;
  if (s.alternative == 1) {
    desc << "empty spectrum: uniformly hyperbolic at every shift";
  } else if (s.alternative == 2) {
    desc << iv.size() << " disjoint closed interval(s), no lower tail";
  } else {
    desc << iv.size() - 1 << " closed interval(s) above a lower tail (kappa, b]";
  }
  if (r.truncated && shrinking) {
    s.suspected = r.lower_tail ? 5 : 4;
    for (auto it = iv.rbegin(); it != iv.rend(); ++it) {
      if (!it->tail) {
        s.b_inf = it->lo;
        break;
      }
    }
    desc << "; accumulation suspected";
    if (s.b_inf) desc << " near " << *s.b_inf;
  }
  s.description = desc.str();
  return s;
}

std::vector<ResolventGap> resolvent_dimension_profile(const DichotomyEngine& engine, const SpectrumResult& r) {
  std::vector<ResolventGap> out;
  for (const auto& g : r.gaps) {
    double a;
    if (std::isfinite(g.lo) && std::isfinite(g.hi)) {
      a = 0.5 * (g.lo + g.hi);
    } else if (std::isfinite(g.lo)) {
      a = std::max(g.lo + 0.5 * r.grid_step, 0.5 * (g.lo + r.upper_end));
    } else if (std::isfinite(g.hi)) {
      a = std::min(g.hi - 0.5 * r.grid_step, 0.5 * (g.hi + r.lower_end));
    } else {
      a = r.upper_end;
    }
    ResolventGap e = g;
    e.dim_u = unstable_dimension(engine, a);
    out.push_back(e);
  }
  for (std::size_t i = 0; i + 1 < out.size(); ++i) {
    if (out[i + 1].dim_u >= out[i].dim_u) {
      std::ostringstream msg;
      msg << "dimension profile not strictly decreasing: dim U " << out[i].dim_u << " then " << out[i + 1].dim_u;
      throw Error(ErrorCode::kNonMonotoneProfile, msg.str());
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::size_t to_right = out.size() - 1 - i;
    if (static_cast<int>(to_right) > out[i].dim_u + 1) {
      throw Error(ErrorCode::kNonMonotoneProfile, "more intervals to the right of a gap than its dim U allows");
    }
  }
  return out;
}

std::vector<ResolventGap> resolvent_dimension_profile(const Cocycle& c, const SpectrumResult& r,
                                                      const ScanConfig& cfg) {
  const DichotomyEngine engine(c, default_samples(c.base(), cfg.p_max, cfg.seed), cfg.dichotomy);
  return resolvent_dimension_profile(engine, r);
}

nlohmann::json to_json(const SpectrumResult& r) {
  auto num = [](double x) {
    if (std::isfinite(x)) return nlohmann::json(x);
    return nlohmann::json(x > 0 ? "inf" : "-inf");
  };
  nlohmann::json intervals = nlohmann::json::array();
  for (const auto& iv : r.intervals) intervals.push_back({num(iv.lo), num(iv.hi)});
  nlohmann::json gaps = nlohmann::json::array();
  for (const auto& g : r.gaps) gaps.push_back({{"lo", num(g.lo)}, {"hi", num(g.hi)}, {"dim_u", g.dim_u}});
  nlohmann::json out = {
      {"kappa", num(r.kappa.value())},
      {"intervals", intervals},
      {"tail", r.lower_tail},
      {"alternative", r.alternative},
      {"gap_dims", gaps},
      {"flags",
       {{"accumulation_suspected", r.accumulation_suspected},
        {"suspected_alternative", r.suspected_alternative},
        {"truncated", r.truncated}}},
      {"log_c", r.log_c},
      {"scan", {{"lower", r.lower_end}, {"upper", r.upper_end}, {"step", r.grid_step}, {"tolerance", r.tolerance},
                {"points", r.trace.size()}}},
  };
  if (r.b_inf) out["flags"]["b_inf_estimate"] = *r.b_inf;
  return out;
}

void write_trace_csv(const SpectrumResult& r, std::ostream& out) {
  out << "shift,pass,dim_u,reason\n";
  out.precision(10);
  for (const auto& p : r.trace) {
    out << p.a << ',' << (p.pass ? 1 : 0) << ',' << p.dim_u << ',' << to_string(p.reason) << '\n';
  }
}

}  // namespace sspec
