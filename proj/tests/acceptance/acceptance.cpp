// Acceptance suite: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../unit/fixtures.hpp"
#include "sspec/dichotomy.hpp"
#include "sspec/jps.hpp"
#include "sspec/linalg.hpp"
#include "sspec/lyapunov.hpp"
#include "sspec/quasicompactness.hpp"
#include "sspec/spectrum.hpp"

using namespace sspec;

namespace {

struct Outcome {
  bool pass = true;
  std::string failure;  // first failed check
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) failure = what;
    pass = pass && ok;
  }
};

const std::vector<BasePoint> kFixed = {OrbitPoint{0}};

const MeasureFamily& fixed_family() {
  static const auto fam = periodic_measures(fixtures::fixed_point(), 1);
  return fam;
}

std::vector<Matrix> constant_fixtures() {
  return {fixtures::diag({2.0, 0.5}), fixtures::diag({4.0, 2.0, 0.5, 0.25}), fixtures::upper_triangular()};
}

std::vector<double> log_moduli(const Matrix& m) {
  Eigen::EigenSolver<Matrix> es(m);
  std::vector<double> v;
  for (int i = 0; i < m.rows(); ++i) v.push_back(std::log(std::abs(es.eigenvalues()[i])));
  std::sort(v.rbegin(), v.rend());
  return v;
}

std::vector<double> distinct(std::vector<double> v) {
  v.erase(std::unique(v.begin(), v.end(), [](double x, double y) { return std::fabs(x - y) < 1e-9; }), v.end());
  return v;
}

std::vector<double> expand(const LyapunovSpectrum& s) {
  std::vector<double> out;
  for (const auto& g : s.exponents)
    for (int i = 0; i < g.multiplicity; ++i) out.push_back(g.lambda);
  return out;
}

Cocycle diagonal_operator() {
  const auto w = WeightSequence::make("half_plus_inv_k", 0.0, 2.0);
  Vector d(64);
  for (int k = 0; k < 64; ++k) d[k] = w(k + 1);
  return Cocycle(fixtures::fixed_point(), CocycleGenerator::constant(d.asDiagonal()), 0.0,
                 NoncompactnessModel::diagonal(w, 64));
}

SubadditiveSequence full_norm(const Cocycle& c) {
  const int d = c.dim();
  return projected_norm_sequence(c, [d](const BasePoint&) { return Matrix(Matrix::Identity(d, d)); }, 0.0);
}

double frob_rel(const Matrix& a, const Matrix& b) {
  const double s = b.norm();
  return s == 0.0 ? (a - b).norm() : (a - b).norm() / s;
}

int run_tool(const std::string& args) {
  const std::string cmd = std::string(SSPEC_TOOL_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// --- criteria ---------------------------------------------------------------

void cocycle_algebra(Outcome& o) {
  std::mt19937_64 rng(2024);
  double law = 0.0, shift = 0.0;
  for (int i = 0; i < 200; ++i) {
    const int d = 1 + static_cast<int>(rng() % 6);
    const int alphabet = 2 + static_cast<int>(rng() % 2);
    std::vector<Matrix> m;
    for (int k = 0; k < alphabet; ++k) m.push_back(fixtures::random_matrix(d, rng));
    const Cocycle c(BaseSystem::full_shift(alphabet), CocycleGenerator::symbol_dependent(m, alphabet));
    const auto q = fixtures::random_window(80, rng, alphabet);
    const int n = static_cast<int>(rng() % 25);
    const int k = static_cast<int>(rng() % (25 - n));
    const Matrix whole = c.product(q, n + k);
    law = std::max(law, frob_rel(c.product(iterate(c.base(), q, n), k) * c.product(q, n), whole));
    const double a = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
    shift = std::max(shift, frob_rel(shifted(c, a).product(q, n + k), std::exp(-a * (n + k)) * whole));
  }
  o.detail << "law residual " << law << ", shift residual " << shift;
  o.require(law <= 1e-10, "cocycle law");
  o.require(shift <= 1e-12, "shifted identity");
}

void constant_ground_truth(Outcome& o) {
  double ladder = 0.0, scan = 0.0;
  for (const Matrix& m : constant_fixtures()) {
    const auto c = fixtures::constant(m);
    const auto want = log_moduli(m);
    const auto got = expand(exponent_ladder(c, fixed_family().members()[0].measure, 512));
    o.require(got.size() == want.size(), "ladder size");
    for (std::size_t i = 0; i < std::min(got.size(), want.size()); ++i)
      ladder = std::max(ladder, std::fabs(got[i] - want[i]));
    const auto r = scan_spectrum(c, ScanConfig{});
    const auto pts = distinct(want);
    o.require(r.intervals.size() == pts.size(), "interval count");
    for (std::size_t i = 0; i < std::min(pts.size(), r.intervals.size()); ++i)
      scan = std::max({scan, std::fabs(r.intervals[i].lo - pts[i]), std::fabs(r.intervals[i].hi - pts[i])});
  }
  o.detail << "ladder error " << ladder << ", scan error " << scan;
  o.require(ladder <= 1e-6, "ladder");
  o.require(scan <= 1e-3, "scanned spectrum");
}

void scalar_shift_fixture(Outcome& o) {
  const auto c = fixtures::scalar_shift();
  const auto r = scan_spectrum(c, ScanConfig{});
  o.require(r.intervals.size() == 1, "one interval");
  if (r.intervals.size() != 1) return;
  o.detail << "sigma [" << r.intervals[0].lo << ", " << r.intervals[0].hi << "]";
  o.require(std::fabs(r.intervals[0].lo) <= 1e-2 && std::fabs(r.intervals[0].hi - 1.0) <= 1e-2, "sigma = [0, 1]");
  const auto p = resolvent_dimension_profile(c, r);
  o.require(p.size() == 2 && p[0].dim_u == 1 && p[1].dim_u == 0, "profile (1, 0)");
  const auto s = classify_structure(r);
  o.detail << ", alternative " << s.alternative << " with k = " << r.intervals.size();
  o.require(s.alternative == 2 && s.suspected == 0, "alternative 2");
}

void jps_theorem(Outcome& o) {
  double worst = 0.0;
  for (const Matrix& m : constant_fixtures()) {
    const auto c = fixtures::constant(m);
    const auto r = scan_spectrum(c, ScanConfig{});
    for (const auto& e : verify_endpoints(c, r, fixed_family(), JpsConfig{}, 1)) {
      o.require(e.verdict == "pass", "constant fixture endpoint");
      worst = std::max(worst, e.residual);
    }
  }
  const auto s = fixtures::scalar_shift();
  const auto rs = scan_spectrum(s, ScanConfig{});
  for (const auto& e : verify_endpoints(s, rs, periodic_measures(s.base(), 8))) {
    o.require(e.verdict == "pass", "shift endpoint");
    o.require(e.matched_measure == (e.side == "upper" ? "per:1" : "per:0"), "shift endpoint measure");
    o.require(e.residual <= 1e-6, "shift endpoint residual");
    worst = std::max(worst, e.residual);
  }
  o.detail << "worst residual " << worst;
  o.require(worst <= 1e-2, "residuals");

  const auto bad = fixtures::corrupted_shift();
  auto fam = periodic_measures(bad.base(), 8);
  fam.remove("per:0111");
  bool failed = false;
  for (const auto& e : verify_endpoints(bad, scan_spectrum(bad, ScanConfig{}), fam)) failed |= e.verdict == "fail";
  o.require(failed, "corrupted verdict");
  const auto out = std::filesystem::temp_directory_path() / "sspec_acceptance_corrupted";
  const int status =
      run_tool("--config " + std::string(SSPEC_CONFIG_DIR) + "/scalar_shift_corrupted.json --out " + out.string());
  o.detail << ", corrupted: verdict " << (failed ? "fail" : "pass") << ", exit " << status;
  o.require(status == 1, "corrupted exit status");
}

void cao_equality(Outcome& o) {
  const auto s = fixtures::scalar_shift();
  const auto fam = periodic_measures(s.base(), 8);
  const auto r = cao_maximize(full_norm(s), fam, orbit_points(fam), 1024);
  o.detail << "shift gap " << std::fabs(r.l_hat - r.max_lambda);
  o.require(std::fabs(r.l_hat - r.max_lambda) <= 5e-2, "shift gap");
  o.require(r.max_lambda <= r.l_hat + 1e-9, "shift inequality");

  for (const Matrix& m : constant_fixtures()) {
    const auto rc = cao_maximize(full_norm(fixtures::constant(m)), fixed_family(), kFixed, 1024);
    o.require(rc.max_lambda <= rc.l_hat + 1e-9, "constant inequality");
  }
  const auto bad = fixtures::corrupted_shift();
  const auto fb = periodic_measures(bad.base(), 8);
  const auto rb = cao_maximize(full_norm(bad), fb, orbit_points(fb), 1024);
  o.require(rb.max_lambda <= rb.l_hat + 1e-9, "corrupted inequality");
  const auto d = diagonal_operator();
  const auto rd = cao_maximize(full_norm(d), fixed_family(), kFixed, 256);
  o.require(rd.max_lambda <= rd.l_hat + 1e-9, "diagonal operator inequality");
}

void subadditivity(Outcome& o) {
  double worst = -1e300;
  auto record = [&](const SubadditiveSequence& f, const std::vector<BasePoint>& samples, int budget) {
    worst = std::max(worst, check_subadditivity(f, samples, budget).max_violation);
  };
  for (const Matrix& m : constant_fixtures()) {
    const auto c = fixtures::constant(m);
    record(full_norm(c), kFixed, 48);
    // Frame-based stable profiles, the sequences endpoint verification uses.
    const DichotomyEngine engine(c, kFixed);
    for (int u = 1; u < c.dim(); ++u) record(stable_profile_sequence(engine, u), kFixed, 48);
    // Coordinate projections are exact for the diagonal fixtures.
    if (!m.isDiagonal()) continue;
    for (int u = 1; u < c.dim(); ++u) {
      Matrix p = Matrix::Zero(m.rows(), m.cols());
      for (int i = u; i < m.rows(); ++i) p(i, i) = 1.0;
      record(projected_norm_sequence(c, [p](const BasePoint&) { return p; }, 0.0), kFixed, 48);
    }
  }
  const auto s = fixtures::scalar_shift();
  const auto fam = periodic_measures(s.base(), 6);
  record(full_norm(s), orbit_points(fam), 40);
  const auto bad = fixtures::corrupted_shift();
  record(full_norm(bad), orbit_points(periodic_measures(bad.base(), 6)), 40);
  o.detail << "max violation " << worst;
  o.require(worst <= 1e-10, "violation");
}

void quasicompactness(Outcome& o) {
  for (const Matrix& m : constant_fixtures()) {
    const auto c = fixtures::constant(m);
    o.require(global_kappa(c, NoncompactnessModel::finite_dim(c.dim()), fixed_family(), 32).is_minus_infinity(),
              "finite-dimensional kappa");
  }
  const auto s = fixtures::scalar_shift();
  o.require(global_kappa(s, NoncompactnessModel::finite_dim(1), periodic_measures(s.base(), 4), 32)
                .is_minus_infinity(),
            "shift kappa");

  const auto d = diagonal_operator();
  const auto r = quasicompact_report(d, *d.model(), fixed_family().members()[0].measure, 32);
  const double kappa = std::log(0.5 + 1.0 / 65);
  o.detail << "kappa " << r.kappa.value() << ", lambda " << r.lambda << ", margin " << r.margin;
  o.require(std::fabs(r.kappa.value() - kappa) <= 1e-6, "kappa");
  o.require(std::fabs(r.lambda - std::log(2.0)) <= 1e-6, "top exponent");
  o.require(std::fabs(r.margin - (std::log(2.0) - kappa)) <= 1e-6, "margin");
  o.require(r.verdict == "quasicompact", "verdict");

  // Backward weighted shift on weights 2^k: alpha = 1/2 holds, alpha = 1/10 does not.
  const int dim = 8;
  Matrix a = Matrix::Zero(dim, dim);
  for (int k = 0; k + 1 < dim; ++k) a(k, k + 1) = 1.0;
  a(0, 0) = 1.0;
  std::vector<double> w(dim);
  for (int k = 0; k < dim; ++k) w[k] = std::ldexp(1.0, k + 1);
  LasotaYorkeData ly;
  ly.strong = VectorNorm::weighted_sup(w);
  ly.weak = VectorNorm::sup(dim);
  ly.beta = [](const BasePoint&) { return 2.0; };
  ly.gamma = [](const BasePoint&) { return 2.0; };
  ly.samples = kFixed;
  for (int k = 0; k < dim; ++k) ly.test_vectors.push_back(Vector::Unit(dim, k));
  std::mt19937_64 rng(20);
  for (int i = 0; i < 20; ++i) ly.test_vectors.push_back(fixtures::random_matrix(dim, rng).col(0));
  const auto c = fixtures::constant(a);
  ly.alpha = [](const BasePoint&) { return 0.5; };
  const auto good = check_lasota_yorke(c, ly);
  ly.alpha = [](const BasePoint&) { return 0.1; };
  const auto bad = check_lasota_yorke(c, ly);
  o.detail << ", LY " << good.verdict << "/" << bad.verdict;
  o.require(good.verdict == "pass", "LY pass fixture");
  o.require(bad.verdict == "fail", "LY counterexample");
}

void dichotomy_soundness(Outcome& o) {
  std::vector<std::pair<Cocycle, ScanConfig>> cases;
  for (const Matrix& m : constant_fixtures()) cases.push_back({fixtures::constant(m), ScanConfig{}});
  cases.push_back({fixtures::scalar_shift(), ScanConfig{}});
  {
    const auto d = diagonal_operator();
    ScanConfig cfg;
    cfg.p_max = 1;
    cfg.kappa = global_kappa(d, *d.model(), fixed_family(), 32);
    cases.push_back({d, cfg});
  }
  std::size_t passing = 0, constancy = 0;
  for (const auto& [c, cfg] : cases) {
    const DichotomyEngine engine(c, default_samples(c.base(), cfg.p_max, cfg.seed), cfg.dichotomy);
    const auto r = scan_spectrum(engine, cfg);
    int last_dim = -1;
    bool have = false;
    for (const auto& pt : r.trace) {
      if (!pt.pass) continue;
      ++passing;
      o.require(pt.recheck_pass, "doubled-horizon recheck");
      if (have) o.require(pt.dim_u <= last_dim, "dimension monotonicity");
      last_dim = pt.dim_u;
      have = true;
      const double k = (pt.a - r.lower_end) / r.grid_step;
      if (std::fabs(k - std::round(k)) > 1e-6) continue;
      ++constancy;
      o.require(engine.local_constancy(engine.test(pt.a)), "local constancy");
    }
  }
  o.detail << passing << " passing certificates, " << constancy << " grid constancy checks";
}

void shift_covariance(Outcome& o) {
  double worst = 0.0;
  for (const Matrix& m : constant_fixtures()) {
    const auto c = fixtures::constant(m);
    const auto base = scan_spectrum(c, ScanConfig{});
    const auto ladder = expand(exponent_ladder(c, fixed_family().members()[0].measure, 512));
    for (double s : {-0.7, 0.3}) {
      const auto cs = shifted(c, s);
      const auto r = scan_spectrum(cs, ScanConfig{});
      o.require(r.intervals.size() == base.intervals.size(), "interval count");
      for (std::size_t i = 0; i < std::min(r.intervals.size(), base.intervals.size()); ++i)
        worst = std::max({worst, std::fabs(r.intervals[i].lo - (base.intervals[i].lo - s)),
                          std::fabs(r.intervals[i].hi - (base.intervals[i].hi - s))});
      const auto ls = expand(exponent_ladder(cs, fixed_family().members()[0].measure, 512));
      o.require(ls.size() == ladder.size(), "ladder size");
      for (std::size_t i = 0; i < std::min(ls.size(), ladder.size()); ++i)
        worst = std::max(worst, std::fabs(ls[i] - (ladder[i] - s)));
    }
  }
  o.detail << "worst deviation " << worst;
  o.require(worst <= 2e-3, "covariance");
}

void met_structure(Outcome& o) {
  double defect = 0.0, excess = -1e300;
  auto check = [&](const Cocycle& c, const ErgodicMeasure& mu, const BasePoint& q) {
    const auto s = exponent_ladder(c, mu, 512);
    const auto split = oseledets_splitting(c, s, q, 256);
    for (double x : split.defects) defect = std::max(defect, x);
    if (split.slow.cols() > 0 && s.kappa.is_finite()) excess = std::max(excess, split.slow_growth - s.kappa.value());
    o.require(!split.rank_collapse, "rank collapse");
  };
  const auto& fixed = fixed_family().members()[0].measure;
  for (const Matrix& m : constant_fixtures()) check(fixtures::constant(m), fixed, OrbitPoint{0});
  check(diagonal_operator(), fixed, OrbitPoint{0});

  const auto s = fixtures::scalar_shift();
  const auto fam = periodic_measures(s.base(), 3);
  for (const auto& member : fam.members())
    check(s, member.measure, std::get<PeriodicOrbit>(member.measure.kind).points[0]);
  const auto bern = ErgodicMeasure::bernoulli({0.5, 0.5});
  check(s, bern, typical_points(bern, s.base(), 1, 5, Window{2048, 2048})[0]);

  std::mt19937_64 rng(21);
  const Cocycle r(s.base(), CocycleGenerator::symbol_dependent(
                                {fixtures::random_matrix(3, rng), fixtures::random_matrix(3, rng)}, 2));
  const auto& mu = fam.find("per:011")->measure;
  check(r, mu, std::get<PeriodicOrbit>(mu.kind).points[0]);

  o.detail << "max defect " << defect << ", slow growth - kappa " << excess;
  o.require(defect <= 1e-4, "equivariance defect");
  o.require(excess <= 0.05, "slow growth");
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;  // 0: no separate budget
    std::function<void(Outcome&)> body;
  };
  const std::vector<Criterion> criteria = {
      {1, "cocycle algebra", 5, cocycle_algebra},
      {2, "constant-cocycle ground truth", 30, constant_ground_truth},
      {3, "scalar full-shift fixture", 60, scalar_shift_fixture},
      {4, "endpoints are Lyapunov exponents", 0, jps_theorem},
      {5, "Cao equality witness", 0, cao_equality},
      {6, "subadditivity", 0, subadditivity},
      {7, "quasicompactness", 0, quasicompactness},
      {8, "dichotomy soundness", 0, dichotomy_soundness},
      {9, "shift covariance", 0, shift_covariance},
      {10, "MET structure", 0, met_structure},
  };
  int failures = 0;
  const auto start = std::chrono::steady_clock::now();
  for (const auto& c : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.body(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0 && secs > c.budget_s) o.require(false, "over the time budget");
    failures += !o.pass;
    std::printf("criterion %2d %-34s %s  (%.1f s) %s%s%s\n", c.id, c.name, o.pass ? "PASS" : "FAIL", secs,
                o.detail.str().c_str(), o.pass ? "" : " | failed: ", o.failure.c_str());
    std::fflush(stdout);
  }
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("total %.1f s, %d failed\n", total, failures);
  return failures == 0 ? 0 : 1;
}
