#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

#include "sspec/cli.hpp"
#include "sspec/error.hpp"
#include "sspec/lyapunov.hpp"
#include "sspec/parallel.hpp"

namespace sspec::cli {

using nlohmann::json;

namespace {

json ext(double x) {
  if (std::isfinite(x)) return x;
  return x > 0 ? "inf" : "-inf";
}

json ext(const ExtendedReal& x) { return ext(x.value()); }

class Stopwatch {
 public:
  explicit Stopwatch(json& sink) : sink_(sink) {}

  template <class F>
  auto time(const std::string& stage, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      record(stage, t0);
    } else {
      auto out = f();
      record(stage, t0);
      return out;
    }
  }

 private:
  void record(const std::string& stage, std::chrono::steady_clock::time_point t0) {
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    sink_[stage] = sink_.value(stage, 0.0) + s;
  }

  json& sink_;
};

struct Context {
  explicit Context(const ExperimentConfig& c) : cfg(c) {}

  const ExperimentConfig& cfg;
  json result = json::object();
  json warnings = json::array();
  json timings = json::object();
  std::map<std::string, std::string> files;
  int exit_code = kExitOk;
  Stopwatch clock{timings};
};

ExtendedReal kappa_of(Context& ctx) {
  const Cocycle& c = *ctx.cfg.cocycle;
  if (!c.model()) return ExtendedReal::minus_infinity();
  return ctx.clock.time("kappa", [&] {
    return global_kappa(c, *c.model(), ctx.cfg.family, ctx.cfg.quasicompact_n_max, ctx.cfg.seed);
  });
}

json oseledets_summary(const Cocycle& c, const LyapunovSpectrum& s, const ErgodicMeasure& mu, int n_max,
                       std::uint64_t seed) {
  const int span = n_max + c.generator().lookahead() + 1;
  const BasePoint q = typical_points(mu, c.base(), 1, seed, Window{span, span}).front();
  const auto split = oseledets_splitting(c, s, q, n_max, seed);
  double defect = 0.0;
  for (double d : split.defects) defect = std::max(defect, d);
  return {{"point", describe(q)},
          {"max_defect", defect},
          {"min_transversality", split.min_transversality},
          {"slow_dim", split.slow.cols()},
          {"slow_growth", ext(split.slow_growth)},
          {"rank_collapse", split.rank_collapse}};
}

void command_lyapunov(Context& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  const Cocycle& c = *cfg.cocycle;
  json measures = json::array();
  for (const auto& m : cfg.family.members()) {
    const auto s = ctx.clock.time("ladder", [&] {
      return exponent_ladder(c, m.measure, cfg.lyapunov_n_max, cfg.lyapunov_resolution, cfg.seed, m.label);
    });
    const auto top = ctx.clock.time("top_exponent", [&] { return top_exponent(c, m.measure, cfg.lyapunov_n_max, cfg.seed); });
    json entry = to_json(s);
    entry["top_exponent"] = {{"value", ext(top.value)}, {"spread", top.spread}, {"samples", top.samples}};
    if (s.ambiguous) ctx.warnings.push_back(m.label + ": exponent gap within twice the resolution");
    if (m.measure.is_periodic() || cfg.family.size() <= 8) {
      try {
        entry["oseledets"] = ctx.clock.time("oseledets", [&] {
          return oseledets_summary(c, s, m.measure, std::min(cfg.lyapunov_n_max, 256), cfg.seed);
        });
      } catch (const Error& e) {
        ctx.warnings.push_back(m.label + ": oseledets splitting unavailable (" + e.what() + ")");
      }
    }
    measures.push_back(std::move(entry));
  }
  ctx.result = {{"measures", measures}, {"n_max", cfg.lyapunov_n_max}, {"resolution", cfg.lyapunov_resolution}};
}

ScanConfig scan_config(Context& ctx) {
  ScanConfig sc = ctx.cfg.scan;
  sc.kappa = kappa_of(ctx);
  return sc;
}

std::string trace_csv(const SpectrumResult& r) {
  std::ostringstream os;
  write_trace_csv(r, os);
  return os.str();
}

json scan_document(Context& ctx, const DichotomyEngine& engine, const ScanConfig& sc, SpectrumResult& r) {
  r = ctx.clock.time("scan", [&] { return scan_spectrum(engine, sc); });
  json doc = to_json(r);
  const auto cls = classify_structure(r);
  doc["structure"] = {{"alternative", cls.alternative},
                      {"suspected", cls.suspected},
                      {"b_inf", cls.b_inf ? ext(*cls.b_inf) : json(nullptr)},
                      {"description", cls.description}};
  try {
    const auto profile = ctx.clock.time("profile", [&] { return resolvent_dimension_profile(engine, r); });
    json p = json::array();
    for (const auto& g : profile) p.push_back({{"lo", ext(g.lo)}, {"hi", ext(g.hi)}, {"dim_u", g.dim_u}});
    doc["dimension_profile"] = p;
  } catch (const Error& e) {
    doc["dimension_profile"] = nullptr;
    ctx.warnings.push_back(std::string("dimension profile: ") + e.what());
    ctx.exit_code = kExitVerificationFailed;
  }
  if (r.truncated) ctx.warnings.push_back("interval budget exhausted; spectrum truncated");
  if (r.accumulation_suspected) ctx.warnings.push_back("intervals may accumulate; structure is a suspicion only");
  if (ctx.cfg.traces) ctx.files["trace_scan.csv"] = trace_csv(r);
  return doc;
}

void command_spectrum(Context& ctx) {
  const Cocycle& c = *ctx.cfg.cocycle;
  const ScanConfig sc = scan_config(ctx);
  const DichotomyEngine engine(c, default_samples(c.base(), sc.p_max, sc.seed), sc.dichotomy);
  SpectrumResult r;
  ctx.result = scan_document(ctx, engine, sc, r);
}

void command_verify_jps(Context& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  const Cocycle& c = *cfg.cocycle;
  const ScanConfig sc = scan_config(ctx);
  SpectrumResult r;
  json doc;
  {
    const DichotomyEngine engine(c, default_samples(c.base(), sc.p_max, sc.seed), sc.dichotomy);
    doc["spectrum"] = scan_document(ctx, engine, sc, r);
  }
  const auto ends = ctx.clock.time("jps", [&] { return verify_endpoints(c, r, cfg.family, cfg.jps, sc.p_max); });
  json list = json::array();
  int matched = 0, failed = 0;
  std::ostringstream growth;
  growth << "endpoint,side,n,rate\n";
  for (std::size_t i = 0; i < ends.size(); ++i) {
    const auto& e = ends[i];
    list.push_back(to_json(e));
    if (e.verdict == "pass") ++matched;
    if (e.verdict == "fail") ++failed;
    char buf[128];
    for (const auto& [n, v] : e.growth) {
      std::snprintf(buf, sizeof buf, "%zu,%s,%d,%.17g\n", i, e.side.c_str(), n, v);
      growth << buf;
    }
  }
  doc["endpoints"] = list;
  doc["matched"] = matched;
  doc["failed"] = failed;
  doc["verdict"] = failed == 0 ? "pass" : "fail";
  if (failed > 0) ctx.exit_code = kExitVerificationFailed;
  if (cfg.traces) ctx.files["trace_growth.csv"] = growth.str();
  ctx.result = doc;
}

json report_json(const QuasicompactReport& r) {
  return {{"kappa", ext(r.kappa)},
          {"lambda", ext(r.lambda)},
          {"margin", ext(r.margin)},
          {"tolerance", r.tolerance},
          {"kappa_stderr", r.kappa_stderr},
          {"worst_residual", r.worst_residual},
          {"inequalities_hold", r.inequalities_hold},
          {"verdict", r.verdict}};
}

std::vector<Vector> test_vectors(int d, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<Vector> out;
  while (static_cast<int>(out.size()) < count) {
    Vector v(d);
    for (int i = 0; i < d; ++i) v[i] = g(rng);
    if (v.norm() > 0) out.push_back(v);
  }
  return out;
}

void command_quasicompact(Context& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  const Cocycle& c = *cfg.cocycle;
  const NoncompactnessModel model = c.model() ? *c.model() : NoncompactnessModel::finite_dim(c.dim());
  json measures = json::array();
  for (const auto& m : cfg.family.members()) {
    const auto rep = ctx.clock.time("quasicompact", [&] {
      return quasicompact_report(c, model, m.measure, cfg.quasicompact_n_max, cfg.quasicompact_tolerance, cfg.seed);
    });
    json entry = report_json(rep);
    entry["measure"] = m.label;
    measures.push_back(entry);
  }
  ctx.result["model"] = model.describe();
  ctx.result["measures"] = measures;
  ctx.result["kappa"] = ext(kappa_of(ctx));

  if (!cfg.lasota_yorke) return;
  const auto& s = *cfg.lasota_yorke;
  LasotaYorkeData data;
  data.strong = s.strong;
  data.weak = s.weak;
  data.alpha = [a = s.alpha](const BasePoint&) { return a; };
  data.beta = [b = s.beta](const BasePoint&) { return b; };
  data.gamma = [g = s.gamma](const BasePoint&) { return g; };
  data.samples = default_samples(c.base(), std::min(cfg.scan.p_max, 6), cfg.seed);
  data.test_vectors = test_vectors(c.dim(), s.test_vectors, cfg.seed);
  const auto check = ctx.clock.time("lasota_yorke", [&] { return check_lasota_yorke(c, data); });
  json ly = report_json(check);
  json bounds = json::array();
  for (const auto& m : cfg.family.members()) {
    const double lambda = top_exponent(c, m.measure, cfg.lyapunov_n_max, cfg.seed).value;
    auto b = kappa_bound_via_ly(data, c.base(), m.measure, lambda, cfg.quasicompact_tolerance, 10000, cfg.seed);
    json entry = report_json(b);
    entry["measure"] = m.label;
    bounds.push_back(entry);
  }
  ly["kappa_bounds"] = bounds;
  ctx.result["lasota_yorke"] = ly;
  if (!check.inequalities_hold) {
    ctx.warnings.push_back("Lasota-Yorke inequalities violated");
    ctx.exit_code = kExitVerificationFailed;
  }
}

// Small fixtures with closed-form answers.
void command_selftest(Context& ctx) {
  json checks = json::array();
  bool all = true;
  auto check = [&](const std::string& name, const std::function<std::pair<bool, std::string>()>& f) {
    std::pair<bool, std::string> r;
    try {
      r = ctx.clock.time(name, f);
    } catch (const std::exception& e) {
      r = {false, e.what()};
    }
    all = all && r.first;
    checks.push_back({{"name", name}, {"pass", r.first}, {"detail", r.second}});
  };

  const BaseSystem fixed = BaseSystem::finite_periodic(1);
  const BaseSystem shift2 = BaseSystem::full_shift(2);

  check("cocycle_law", [&] {
    std::mt19937_64 rng(ctx.cfg.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Matrix> ms;
    for (int s = 0; s < 2; ++s) {
      Matrix m(3, 3);
      for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = u(rng);
      ms.push_back(m);
    }
    const Cocycle c(shift2, CocycleGenerator::symbol_dependent(ms, 2));
    const BasePoint q = ShiftPoint::periodic_word({0, 1, 1, 0, 1});
    double worst = 0.0;
    for (int n = 0; n <= 8; ++n) {
      for (int m = 0; m <= 8; ++m) {
        worst = std::max(worst, linalg::relative_error(c.product(q, n + m),
                                                       c.product(iterate(shift2, q, n), m) * c.product(q, n)));
      }
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "worst relative residual %.3g", worst);
    return std::make_pair(worst <= 1e-10, std::string(buf));
  });

  check("constant_diagonal_spectrum", [&] {
    Matrix a(2, 2);
    a << 2.0, 0.0, 0.0, 0.5;
    const auto r = scan_spectrum(Cocycle(fixed, CocycleGenerator::constant(a)), ScanConfig{});
    const double l2 = std::log(2.0);
    bool ok = r.intervals.size() == 2;
    if (ok) {
      ok = std::fabs(r.intervals[0].lo - l2) <= 1e-3 && std::fabs(r.intervals[0].hi - l2) <= 1e-3 &&
           std::fabs(r.intervals[1].lo + l2) <= 1e-3 && std::fabs(r.intervals[1].hi + l2) <= 1e-3;
    }
    return std::make_pair(ok, std::to_string(r.intervals.size()) + " intervals");
  });

  check("scalar_shift_jps", [&] {
    const Cocycle c(shift2, CocycleGenerator::symbol_dependent(
                                {Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, std::exp(1.0))}, 2));
    const auto r = scan_spectrum(c, ScanConfig{});
    if (r.intervals.size() != 1) return std::make_pair(false, std::to_string(r.intervals.size()) + " intervals");
    const auto ends = verify_endpoints(c, r, periodic_measures(shift2, 8));
    bool ok = std::fabs(r.intervals[0].lo) <= 1e-2 && std::fabs(r.intervals[0].hi - 1.0) <= 1e-2;
    std::string matched;
    for (const auto& e : ends) {
      ok = ok && e.verdict == "pass";
      matched += (matched.empty() ? "" : ",") + e.matched_measure;
    }
    return std::make_pair(ok, "matched " + matched);
  });

  check("finite_dim_kappa", [&] {
    const Cocycle c(fixed, CocycleGenerator::constant(Matrix::Identity(3, 3)));
    const auto k = kappa_estimate(c, NoncompactnessModel::finite_dim(3), periodic_measures(fixed, 1).members()[0].measure, 8);
    return std::make_pair(k.is_minus_infinity(), "kappa " + k.to_string());
  });

  ctx.result = {{"checks", checks}, {"pass", all}};
  if (!all) ctx.exit_code = kExitVerificationFailed;
}

}  // namespace

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json hashable(const json& report) {
  json out = report;
  out.erase("timings");
  return out;
}

RunReport run(const ExperimentConfig& cfg) {
  Context ctx(cfg);
  set_default_threads(cfg.scan.threads);
  const auto t0 = std::chrono::steady_clock::now();
  if (cfg.command == "lyapunov") command_lyapunov(ctx);
  else if (cfg.command == "spectrum") command_spectrum(ctx);
  else if (cfg.command == "quasicompact") command_quasicompact(ctx);
  else if (cfg.command == "verify-jps") command_verify_jps(ctx);
  else if (cfg.command == "selftest") command_selftest(ctx);
  else throw Error(ErrorCode::kConfig, "unknown command '" + cfg.command + "'");
  ctx.timings["total"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  RunReport out;
  out.document = {{"tool", "sspec"},
                  {"version", kVersion},
                  {"command", cfg.command},
                  {"seed", cfg.seed},
                  {"config_hash", "fnv1a64:" + fnv1a_hex(cfg.document.dump())},
                  {"result", ctx.result},
                  {"warnings", ctx.warnings},
                  {"exit_code", ctx.exit_code},
                  {"timings", ctx.timings}};
  out.exit_code = ctx.exit_code;
  out.files = std::move(ctx.files);
  out.files["report.json"] = out.document.dump(2) + "\n";
  return out;
}

}  // namespace sspec::cli
