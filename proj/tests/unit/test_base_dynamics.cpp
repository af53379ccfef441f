#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>

#include "doctest.h"
#include "fixtures.hpp"
#include "sspec/base_dynamics.hpp"
#include "sspec/error.hpp"

using namespace sspec;

namespace {

// Cycles of length exactly p counted by brute force: all words of length p
// that are not a power of a shorter word, modulo rotation.
std::set<std::string> primitive_cycles(int k, int p) {
  std::set<std::string> out;
  std::string w(p, '0');
  const int total = static_cast<int>(std::pow(k, p));
  for (int code = 0; code < total; ++code) {
    int x = code;
    for (int i = p - 1; i >= 0; --i, x /= k) w[i] = static_cast<char>('0' + x % k);
    bool primitive = true;
    for (int d = 1; d < p && primitive; ++d) {
      if (p % d) continue;
      bool repeats = true;
      for (int i = d; i < p && repeats; ++i) repeats = w[i] == w[i - d];
      if (repeats) primitive = false;
    }
    if (!primitive) continue;
    std::string best = w;
    for (int r = 1; r < p; ++r) best = std::min(best, w.substr(r) + w.substr(0, r));
    out.insert(best);
  }
  return out;
}

}  // namespace

TEST_SUITE("base_dynamics") {

TEST_CASE("circle rotation wraps") {
  const auto s = BaseSystem::circle_rotation(0.25);
  const auto q = iterate(s, CirclePoint{0.5}, 2);
  CHECK(std::get<CirclePoint>(q).angle == doctest::Approx(0.0));
  const auto back = iterate(s, CirclePoint{0.1}, -1);
  CHECK(std::get<CirclePoint>(back).angle == doctest::Approx(0.85));
}

TEST_CASE("finite periodic wraps cyclically") {
  const auto s = BaseSystem::finite_periodic(3);
  CHECK(std::get<OrbitPoint>(iterate(s, OrbitPoint{2}, 1)).index == 0);
  CHECK(std::get<OrbitPoint>(iterate(s, OrbitPoint{0}, -1)).index == 2);
  CHECK(std::get<OrbitPoint>(iterate(s, OrbitPoint{1}, 0)).index == 1);
}

TEST_CASE("shift moves the window by index arithmetic") {
  const auto s = BaseSystem::full_shift(2);
  const std::vector<Symbol> word = {1, 0, 1, 1, 0, 0, 1};
  const BasePoint q = ShiftPoint::window(word, 2);
  for (int n = -2; n <= 3; ++n) {
    const auto& p = std::get<ShiftPoint>(iterate(s, q, n));
    // coordinate j of f^n q is word[2 + n + j]
    for (int j = -(2 + n); 2 + n + j < static_cast<int>(word.size()); ++j) CHECK(p.at(j) == word[2 + n + j]);
  }
  const auto& p1 = std::get<ShiftPoint>(iterate(s, q, 1));
  CHECK_THROWS_AS(p1.at(5), Error);
}

TEST_CASE("variant mismatch is a typed error") {
  const auto s = BaseSystem::circle_rotation(0.3);
  try {
    iterate(s, OrbitPoint{0}, 1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kVariantMismatch);
  }
}

TEST_CASE("group law on sampled points") {
  std::mt19937_64 rng(3);
  const auto shift = BaseSystem::full_shift(3);
  const auto circle = BaseSystem::circle_rotation((std::sqrt(5.0) - 1) / 2);
  const auto orbit = BaseSystem::finite_periodic(7);
  for (int t = 0; t < 50; ++t) {
    const int a = static_cast<int>(rng() % 41) - 20;
    const int b = static_cast<int>(rng() % 41) - 20;
    const BasePoint qs = fixtures::random_window(200, rng, 3);
    CHECK(shift.same_point(iterate(shift, qs, a + b), iterate(shift, iterate(shift, qs, a), b)));
    const BasePoint qc = CirclePoint{std::uniform_real_distribution<double>(0, 1)(rng)};
    const double x = std::get<CirclePoint>(iterate(circle, qc, a + b)).angle;
    const double y = std::get<CirclePoint>(iterate(circle, iterate(circle, qc, a), b)).angle;
    CHECK(std::min(std::fabs(x - y), 1 - std::fabs(x - y)) <= 1e-12);
    const BasePoint qo = OrbitPoint{static_cast<std::int64_t>(rng() % 7)};
    CHECK(orbit.same_point(iterate(orbit, qo, a + b), iterate(orbit, iterate(orbit, qo, a), b)));
  }
}

TEST_CASE("periodic orbit sample is the cycle") {
  const auto s = BaseSystem::finite_periodic(2);
  const auto mu = ErgodicMeasure::periodic_orbit(s, {OrbitPoint{0}, OrbitPoint{1}});
  const auto orbit = sample_orbit(mu, s, 5, 1);
  REQUIRE(orbit.size() == 5);
  for (int i = 0; i < 5; ++i) CHECK(std::get<OrbitPoint>(orbit[i]).index == i % 2);
}

TEST_CASE("degenerate Bernoulli gives the constant word") {
  const auto s = BaseSystem::full_shift(2);
  const auto orbit = sample_orbit(ErgodicMeasure::bernoulli({1.0, 0.0}), s, 4, 9);
  for (const auto& q : orbit) {
    const auto& p = std::get<ShiftPoint>(q);
    for (int j = 0; j < 4 - static_cast<int>(&q - &orbit[0]); ++j) CHECK(p.at(j) == 0);
  }
}

TEST_CASE("sample orbit consistency and determinism") {
  const auto s = BaseSystem::full_shift(2);
  const auto mu = ErgodicMeasure::bernoulli({0.3, 0.7});
  const auto a = sample_orbit(mu, s, 50, 42);
  const auto b = sample_orbit(mu, s, 50, 42);
  for (std::size_t i = 0; i + 1 < a.size(); ++i) CHECK(s.same_point(a[i + 1], iterate(s, a[i], 1)));
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::get<ShiftPoint>(a[i]).at(0) == std::get<ShiftPoint>(b[i]).at(0));
}

TEST_CASE("Lebesgue orbit equidistributes") {
  const auto s = BaseSystem::circle_rotation((std::sqrt(5.0) - 1) / 2);
  const auto orbit = sample_orbit(ErgodicMeasure::lebesgue(), s, 10000, 5);
  double sum = 0.0;
  for (const auto& q : orbit) sum += std::get<CirclePoint>(q).angle;
  CHECK(std::fabs(sum / orbit.size() - 0.5) <= 1e-2);
}

TEST_CASE("Bernoulli rejects bad vectors") {
  CHECK_THROWS_AS(ErgodicMeasure::bernoulli({0.5, 0.6}), Error);
  CHECK_THROWS_AS(ErgodicMeasure::bernoulli({-0.1, 1.1}), Error);
}

TEST_CASE("periodic measures match necklace enumeration") {
  const auto s = BaseSystem::full_shift(2);
  CHECK(periodic_measures(s, 1).size() == 2);
  CHECK(periodic_measures(s, 2).size() == 3);
  CHECK(periodic_measures(s, 3).size() == 5);
  for (int k : {2, 3}) {
    for (int p_max = 1; p_max <= 6; ++p_max) {
      std::set<std::string> expected;
      for (int p = 1; p <= p_max; ++p) {
        for (const auto& w : primitive_cycles(k, p)) expected.insert("per:" + w);
      }
      const auto fam = periodic_measures(BaseSystem::full_shift(k), p_max);
      std::set<std::string> got;
      for (const auto& m : fam.members()) got.insert(m.label);
      CHECK(got == expected);
    }
  }
}

TEST_CASE("irrational rotation family is Lebesgue only") {
  const auto fam = periodic_measures(BaseSystem::circle_rotation((std::sqrt(5.0) - 1) / 2), 8);
  REQUIRE(fam.size() == 1);
  CHECK(std::holds_alternative<LebesgueCircle>(fam.members()[0].measure.kind));
}

TEST_CASE("family labels are unique") {
  MeasureFamily f;
  f.add("a", ErgodicMeasure::lebesgue());
  CHECK_THROWS_AS(f.add("a", ErgodicMeasure::lebesgue()), Error);
  CHECK(f.remove("a"));
  CHECK_FALSE(f.remove("a"));
}

TEST_CASE("periodic orbit measure validates the cycle") {
  const auto s = BaseSystem::finite_periodic(3);
  CHECK_THROWS_AS(ErgodicMeasure::periodic_orbit(s, {OrbitPoint{0}, OrbitPoint{2}}), Error);
}

}
