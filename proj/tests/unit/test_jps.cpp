#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "sspec/jps.hpp"
#include "sspec/quasicompactness.hpp"

using namespace sspec;

namespace {

double op_norm(const Matrix& m) { return Eigen::JacobiSVD<Matrix>(m).singularValues()(0); }

Matrix identity_projection(const BasePoint&, int d) { return Matrix::Identity(d, d); }

// Largest Birkhoff average of c_{q_0} over periodic words of length <= p.
double max_periodic_average(double c0, double c1, int p) {
  double best = -1e300;
  for (int len = 1; len <= p; ++len)
    for (int w = 0; w < (1 << len); ++w) {
      const int ones = __builtin_popcount(w);
      best = std::max(best, (ones * c1 + (len - ones) * c0) / len);
    }
  return best;
}

const EndpointRealization* side(const std::vector<EndpointRealization>& v, const std::string& s) {
  for (const auto& e : v)
    if (e.side == s) return &e;
  return nullptr;
}

}  // namespace

TEST_SUITE("jps") {

TEST_CASE("projected norm sequences on closed-form fixtures") {
  const auto c = fixtures::constant(fixtures::diag({2.0, 0.5}));
  Matrix p = Matrix::Zero(2, 2);
  p(1, 1) = 1.0;
  const auto f = projected_norm_sequence(c, [p](const BasePoint&) { return p; }, 0.0);
  CHECK(f(OrbitPoint{0}, 4) == doctest::Approx(-4.0 * std::log(2.0)));

  const auto s = fixtures::scalar_shift();
  const auto g = projected_norm_sequence(s, [](const BasePoint& q) { return identity_projection(q, 1); }, 0.0);
  // Birkhoff sum over 0101.
  CHECK(g(ShiftPoint::periodic_word({0, 1}), 4) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("subadditivity with exact projections") {
  std::mt19937_64 rng(5);
  const auto diag = fixtures::constant(fixtures::diag({2.0, 0.5}));
  Matrix p = Matrix::Zero(2, 2);
  p(1, 1) = 1.0;
  auto rep = check_subadditivity(projected_norm_sequence(diag, [p](const BasePoint&) { return p; }, 0.0),
                                 {OrbitPoint{0}}, 40);
  CHECK(rep.max_violation <= 1e-12);
  CHECK(rep.triples > 0);

  std::vector<Matrix> m;
  for (int i = 0; i < 2; ++i) m.push_back(fixtures::random_matrix(3, rng));
  const Cocycle rnd(BaseSystem::full_shift(2), CocycleGenerator::symbol_dependent(m, 2));
  const auto full = projected_norm_sequence(rnd, [](const BasePoint& q) { return identity_projection(q, 3); }, 0.0);
  std::vector<BasePoint> samples;
  for (int i = 0; i < 8; ++i) samples.push_back(fixtures::random_window(200, rng));
  rep = check_subadditivity(full, samples, 24);
  CHECK(rep.max_violation <= 1e-10);

  // Direct oracle on one triple: ||A(q, n + m)|| <= ||A(f^n q, m)|| ||A(q, n)||.
  const auto q = samples[0];
  const double lhs = std::log(op_norm(cocycle_product(rnd, q, 11)));
  const double rhs = std::log(op_norm(cocycle_product(rnd, iterate(rnd.base(), q, 5), 6))) +
                     std::log(op_norm(cocycle_product(rnd, q, 5)));
  CHECK(lhs <= rhs + 1e-12);
}

TEST_CASE("subadditivity slack covers a corrupted projection") {
  const Matrix a = fixtures::upper_triangular();
  const auto c = fixtures::constant(a);
  // Coordinate projection onto e_2: not equivariant for a triangular A.
  Matrix p = Matrix::Zero(2, 2);
  p(1, 1) = 1.0;
  p(0, 1) = 0.1;
  const auto f = projected_norm_sequence(c, [p](const BasePoint&) { return p; }, 0.0);
  const auto rep = check_subadditivity(f, {OrbitPoint{0}}, 30);
  CHECK(rep.max_adjusted <= 1e-10);
}

TEST_CASE("lambda_mu on the scalar shift") {
  const auto s = fixtures::scalar_shift();
  const auto g = projected_norm_sequence(s, [](const BasePoint& q) { return identity_projection(q, 1); }, 0.0);
  const auto ones = ErgodicMeasure::periodic_orbit(s.base(), {ShiftPoint::periodic_word({1})});
  CHECK(lambda_mu(g, ones, 256).value == doctest::Approx(1.0).epsilon(1e-12));
  const auto bern = ErgodicMeasure::bernoulli({0.5, 0.5});
  CHECK(std::fabs(lambda_mu(g, bern, 1024).value - 0.5) <= 2e-2);
}

TEST_CASE("Cao maximization") {
  SUBCASE("scalar shift") {
    const auto s = fixtures::scalar_shift();
    const auto g = projected_norm_sequence(s, [](const BasePoint& q) { return identity_projection(q, 1); }, 0.0);
    const auto fam = periodic_measures(s.base(), 8);
    const auto r = cao_maximize(g, fam, orbit_points(fam), 1024);
    CHECK(r.argmax == "per:1");
    CHECK(r.max_lambda == doctest::Approx(max_periodic_average(0.0, 1.0, 8)).epsilon(1e-9));
    CHECK(r.max_lambda <= r.l_hat + 1e-9);
    CHECK(std::fabs(r.l_hat - r.max_lambda) <= 5e-2);
  }
  SUBCASE("constant cocycle: every value equal") {
    const auto c = fixtures::constant(fixtures::diag({2.0, 0.5}));
    const auto g = projected_norm_sequence(c, [](const BasePoint& q) { return identity_projection(q, 2); }, 0.0);
    const auto fam = periodic_measures(c.base(), 1);
    const auto r = cao_maximize(g, fam, orbit_points(fam), 256);
    CHECK(r.gap <= 1e-6);
    CHECK(r.max_lambda <= r.l_hat + 1e-9);
  }
  SUBCASE("finite-dimensional ic sequence is degenerate") {
    const auto c = fixtures::constant(fixtures::diag({2.0, 0.5}));
    const auto g = ic_log_norm_sequence(c, NoncompactnessModel::finite_dim(2));
    const auto fam = periodic_measures(c.base(), 1);
    CHECK(cao_maximize(g, fam, orbit_points(fam), 64).degenerate);
  }
}

TEST_CASE("endpoints of constant cocycles") {
  for (const Matrix& m : {fixtures::diag({2.0, 0.5}), fixtures::upper_triangular()}) {
    const auto c = fixtures::constant(m);
    const auto r = scan_spectrum(c, ScanConfig{});
    const auto v = verify_endpoints(c, r, periodic_measures(c.base(), 1), JpsConfig{}, 1);
    REQUIRE(v.size() == 2 * r.intervals.size());
    for (const auto& e : v) {
      CHECK(e.verdict == "pass");
      CHECK(e.residual <= 1e-2);
      CHECK(std::fabs(std::fabs(e.exponent) - std::log(2.0)) <= 1e-6);
    }
  }
}

TEST_CASE("scalar shift endpoints are the fixed points") {
  const auto s = fixtures::scalar_shift();
  const auto r = scan_spectrum(s, ScanConfig{});
  const auto v = verify_endpoints(s, r, periodic_measures(s.base(), 8));
  const auto* up = side(v, "upper");
  const auto* lo = side(v, "lower");
  REQUIRE(up);
  REQUIRE(lo);
  CHECK(up->matched_measure == "per:1");
  CHECK(lo->matched_measure == "per:0");
  CHECK(up->residual <= 1e-6);
  CHECK(lo->residual <= 1e-6);
  CHECK(up->verdict == "pass");
  CHECK(lo->verdict == "pass");
  CHECK_FALSE(up->growth.empty());
}

TEST_CASE("corrupted generator with its orbit excluded fails") {
  const auto c = fixtures::corrupted_shift();
  auto fam = periodic_measures(c.base(), 8);
  REQUIRE(fam.remove("per:0111"));
  const auto r = scan_spectrum(c, ScanConfig{});
  const auto v = verify_endpoints(c, r, fam);
  const auto* up = side(v, "upper");
  REQUIRE(up);
  CHECK(up->verdict == "fail");
  CHECK(std::fabs(up->value - 1.125) <= 1e-2);
}

TEST_CASE("JSON") {
  EndpointRealization e;
  e.side = "upper";
  e.verdict = "pass";
  e.growth = {{1, 0.5}, {2, 0.75}};
  const auto j = to_json(e);
  CHECK(j.at("side") == "upper");
  CHECK(j.at("growth").size() == 2);
}

}  // TEST_SUITE
