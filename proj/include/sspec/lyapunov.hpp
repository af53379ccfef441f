#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "sspec/base_dynamics.hpp"
#include "sspec/cocycle.hpp"
#include "sspec/extended_real.hpp"

namespace sspec {

struct TopExponent {
  double value = 0.0;
  double spread = 0.0;  // max - min over the sample points
  int samples = 0;
};

/// (1/n_max) log ||A(q, n_max)|| averaged over mu-typical points (at least 8,
/// or every point of a periodic orbit). Includes the operator-model tail.
TopExponent top_exponent(const Cocycle& c, const ErgodicMeasure& mu, int n_max, std::uint64_t seed = 1);

struct ExponentGroup {
  double lambda = 0.0;
  int multiplicity = 1;
  double spread = 0.0;  // across sample points
  double drift = 0.0;   // first-half vs second-half estimate
};

struct LyapunovSpectrum {
  std::vector<ExponentGroup> exponents;  // strictly decreasing
  ExtendedReal kappa;
  std::string measure;
  int n_max = 0;
  double resolution = 0.05;
  int folded = 0;          // directions folded into the tail
  bool ambiguous = false;  // a gap close to the resolution
  std::vector<double> raw;  // per-direction averaged exponents, -inf for killed

  int fast_dim() const;
};

/// Benettin QR along mu-typical orbits: averaged log|R_kk| after discarding
/// the first n_max / 4 steps, clustered at `resolution`, with everything at
/// or below kappa + resolution folded into the tail.
LyapunovSpectrum exponent_ladder(const Cocycle& c, const ErgodicMeasure& mu, int n_max, double resolution = 0.05,
                                 std::uint64_t seed = 1, const std::string& label = "");

struct OseledetsSplitting {
  BasePoint q;
  std::vector<Matrix> fast;         // orthonormal bases of E_i(q)
  Matrix slow;                      // orthonormal basis of the head part of F(q)
  std::vector<double> defects;      // angle(A(q) E_i(q), E_i(f q))
  double min_transversality = 0.0;  // smallest principal angle between distinct E_i
  double slow_growth = 0.0;         // (1/n_max) log ||A(q, n_max)|_F||, tail included
  bool rank_collapse = false;
};

/// E_i(q) from the forward flag intersected with the adjoint (slow) flag of a
/// two-sided frame run of horizon n_max.
OseledetsSplitting oseledets_splitting(const Cocycle& c, const LyapunovSpectrum& spectrum, const BasePoint& q,
                                       int n_max, std::uint64_t seed = 7);

nlohmann::json to_json(const LyapunovSpectrum& s);

}  // namespace sspec
