#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "sspec/error.hpp"
#include "sspec/quasicompactness.hpp"
#include "sspec/spectrum.hpp"

using namespace sspec;

namespace {

// Sorted descending log |eigenvalue|, one entry per distinct modulus.
std::vector<double> distinct_log_moduli(const Matrix& m) {
  Eigen::EigenSolver<Matrix> es(m);
  std::vector<double> v;
  for (int i = 0; i < m.rows(); ++i) v.push_back(std::log(std::abs(es.eigenvalues()[i])));
  std::sort(v.rbegin(), v.rend());
  v.erase(std::unique(v.begin(), v.end(), [](double x, double y) { return std::fabs(x - y) < 1e-9; }), v.end());
  return v;
}

// Birkhoff averages over every periodic word up to length p, extremes.
std::pair<double, double> birkhoff_extremes(double c0, double c1, int p) {
  double lo = 1e300, hi = -1e300;
  for (int len = 1; len <= p; ++len) {
    for (int w = 0; w < (1 << len); ++w) {
      const int ones = __builtin_popcount(w);
      const double avg = (ones * c1 + (len - ones) * c0) / len;
      lo = std::min(lo, avg);
      hi = std::max(hi, avg);
    }
  }
  return {lo, hi};
}

void check_point_spectrum(const Matrix& m) {
  const auto r = scan_spectrum(fixtures::constant(m), ScanConfig{});
  const auto want = distinct_log_moduli(m);
  REQUIRE(r.intervals.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    CHECK(std::fabs(r.intervals[i].lo - want[i]) <= 1e-3);
    CHECK(std::fabs(r.intervals[i].hi - want[i]) <= 1e-3);
  }
  CHECK_FALSE(r.lower_tail);
  CHECK(r.alternative == 2);
  const auto profile = resolvent_dimension_profile(fixtures::constant(m), r);
  REQUIRE(profile.size() == want.size() + 1);
  for (std::size_t i = 0; i < profile.size(); ++i) {
    // Left to right, the gap dim U is the count of moduli to its right.
    int oracle = 0;
    Eigen::EigenSolver<Matrix> es(m);
    const double probe = std::isfinite(profile[i].lo) ? profile[i].lo + 1e-2 : profile[i].hi - 1.0;
    for (int k = 0; k < m.rows(); ++k) oracle += std::log(std::abs(es.eigenvalues()[k])) > probe;
    CHECK(profile[i].dim_u == oracle);
  }
}

}  // namespace

TEST_SUITE("spectrum") {

TEST_CASE("constant cocycles have point spectra at the log moduli") {
  check_point_spectrum(fixtures::diag({2.0, 0.5}));
  check_point_spectrum(fixtures::upper_triangular());
  check_point_spectrum(fixtures::diag({4.0, 2.0, 0.5, 0.25}));
}

TEST_CASE("diag(2, 1/2) profile is 2, 1, 0") {
  const auto c = fixtures::constant(fixtures::diag({2.0, 0.5}));
  const auto r = scan_spectrum(c, ScanConfig{});
  const auto p = resolvent_dimension_profile(c, r);
  REQUIRE(p.size() == 3);
  CHECK(p[0].dim_u == 2);
  CHECK(p[1].dim_u == 1);
  CHECK(p[2].dim_u == 0);
  CHECK(classify_structure(r).alternative == 2);
}

TEST_CASE("scalar shift spectrum is the Birkhoff range") {
  const auto c = fixtures::scalar_shift();
  const auto r = scan_spectrum(c, ScanConfig{});
  const auto [lo, hi] = birkhoff_extremes(0.0, 1.0, 8);
  REQUIRE(r.intervals.size() == 1);
  CHECK(std::fabs(r.intervals[0].lo - lo) <= 1e-2);
  CHECK(std::fabs(r.intervals[0].hi - hi) <= 1e-2);
  const auto p = resolvent_dimension_profile(c, r);
  REQUIRE(p.size() == 2);
  CHECK(p[0].dim_u == 1);
  CHECK(p[1].dim_u == 0);
  const auto s = classify_structure(r);
  CHECK(s.alternative == 2);
  CHECK(s.suspected == 0);
}

TEST_CASE("scalar e^0.3 over a fixed point") {
  const auto c = fixtures::constant(Matrix::Constant(1, 1, std::exp(0.3)));
  const auto r = scan_spectrum(c, ScanConfig{});
  REQUIRE(r.intervals.size() == 1);
  CHECK(std::fabs(r.intervals[0].lo - 0.3) <= 1e-3);
  CHECK(std::fabs(r.intervals[0].hi - 0.3) <= 1e-3);
}

TEST_CASE("shift covariance") {
  const Matrix m = fixtures::diag({2.0, 0.5});
  const auto base = scan_spectrum(fixtures::constant(m), ScanConfig{});
  for (double s : {-0.7, 0.3}) {
    const auto r = scan_spectrum(shifted(fixtures::constant(m), s), ScanConfig{});
    REQUIRE(r.intervals.size() == base.intervals.size());
    for (std::size_t i = 0; i < r.intervals.size(); ++i) {
      CHECK(std::fabs(r.intervals[i].lo - (base.intervals[i].lo - s)) <= 2e-3);
      CHECK(std::fabs(r.intervals[i].hi - (base.intervals[i].hi - s)) <= 2e-3);
    }
  }
}

TEST_CASE("diagonal operator: truncated list at the log weights") {
  const auto w = WeightSequence::make("half_plus_inv_k", 0.0, 2.0);
  const int n = 64;
  Vector d(n);
  for (int k = 0; k < n; ++k) d[k] = w(k + 1);
  const auto model = NoncompactnessModel::diagonal(w, n);
  const Cocycle c(fixtures::fixed_point(), CocycleGenerator::constant(d.asDiagonal()), 0.0, model);
  ScanConfig cfg;
  cfg.p_max = 1;
  cfg.kappa = global_kappa(c, model, periodic_measures(c.base(), 1), 32);
  REQUIRE(cfg.kappa.value() == doctest::Approx(std::log(0.5 + 1.0 / 65)).epsilon(1e-6));
  const auto r = scan_spectrum(c, cfg);
  CHECK(r.truncated);
  REQUIRE(r.intervals.size() == static_cast<std::size_t>(cfg.interval_budget));
  for (std::size_t i = 0; i < r.intervals.size(); ++i) {
    const double want = std::log(w(static_cast<long>(i) + 1));
    CHECK(std::fabs(0.5 * (r.intervals[i].lo + r.intervals[i].hi) - want) <= 1e-3);
  }
  const auto s = classify_structure(r);
  CHECK(s.alternative == 2);
  CHECK(s.suspected == 4);
  REQUIRE(s.b_inf.has_value());
  CHECK(*s.b_inf > cfg.kappa.value());
  const auto p = resolvent_dimension_profile(c, r);
  for (std::size_t i = 1; i < p.size(); ++i) CHECK(p[i].dim_u < p[i - 1].dim_u);
}

TEST_CASE("empty result is alternative 1") {
  SpectrumResult r;
  CHECK(classify_structure(r).alternative == 1);
}

TEST_CASE("non-monotone profile is a hard error") {
  // A fake interval at 1.0 adds a gap whose dimension does not drop.
  const auto c = fixtures::constant(Matrix::Constant(1, 1, std::exp(0.5)));
  SpectrumResult r;
  r.intervals = {{1.0, 1.0, false}, {0.5, 0.5, false}};
  r.gaps = {{-1.0, 0.5, 1}, {0.5, 1.0, 0}, {1.0, 2.0, 0}};
  try {
    resolvent_dimension_profile(c, r);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNonMonotoneProfile);
  }
}

TEST_CASE("config validation") {
  ScanConfig cfg;
  cfg.grid_step = 1e-3;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = ScanConfig{};
  cfg.tolerance = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("JSON and CSV output") {
  const auto r = scan_spectrum(fixtures::constant(fixtures::diag({2.0, 0.5})), ScanConfig{});
  const auto j = to_json(r);
  CHECK(j.at("intervals").size() == 2);
  CHECK(j.at("alternative").get<int>() == 2);
  std::ostringstream out;
  write_trace_csv(r, out);
  const std::string csv = out.str();
  CHECK(csv.rfind("shift,pass,dim_u,reason\n", 0) == 0);
  CHECK(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) == r.trace.size() + 1);
}

}  // TEST_SUITE
