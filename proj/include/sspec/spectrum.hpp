#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "sspec/dichotomy.hpp"
#include "sspec/extended_real.hpp"

namespace sspec {

struct ScanConfig {
  double grid_step = 0.02;
  double tolerance = 1e-3;   // bisection bracket width
  int p_max = 8;             // sample set on shifts
  std::optional<double> floor;  // lower scan end; default below every one-step rate
  ExtendedReal kappa;        // from global_kappa; -inf in finite dimension
  int interval_budget = 32;
  int norm_budget = 1000;    // angle grid for the norm bound
  DichotomyConfig dichotomy;
  int threads = 0;
  std::uint64_t seed = 1;

  /// Throws kInvalidArgument unless grid_step > 2 margin and all values are in range.
  void validate() const;
};

struct SpectralInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool tail = false;  // lo is kappa, the interval is (kappa, hi]
};

struct ResolventGap {
  double lo = 0.0;  // -inf / +inf for the unbounded gaps
  double hi = 0.0;
  int dim_u = -1;
};

struct ScanPoint {
  double a = 0.0;
  bool pass = false;
  int dim_u = -1;
  Reason reason = Reason::kOk;
  double lambda = 0.0;
  double D = 0.0;
  bool recheck_pass = false;
};

struct SpectrumResult {
  std::vector<SpectralInterval> intervals;  // decreasing: b_1 >= a_1 > b_2 >= ...
  bool lower_tail = false;
  ExtendedReal kappa;
  std::vector<ResolventGap> gaps;  // increasing in a
  int alternative = 1;
  bool accumulation_suspected = false;
  int suspected_alternative = 0;  // 4 or 5 when accumulation is suspected
  std::optional<double> b_inf;
  bool truncated = false;          // interval budget exceeded
  double log_c = 0.0;
  double lower_end = 0.0;
  double upper_end = 0.0;
  double grid_step = 0.0;
  double tolerance = 0.0;
  std::vector<ScanPoint> trace;    // every tested shift, increasing
};

/// Grid scan of the dichotomy test over (kappa_cut, log C + 0.1], with
/// bisection of every pass/fail and dimension-change bracket.
SpectrumResult scan_spectrum(const Cocycle& c, const ScanConfig& cfg);
SpectrumResult scan_spectrum(const DichotomyEngine& engine, const ScanConfig& cfg);

struct StructureClass {
  int alternative = 1;
  int suspected = 0;  // 4 or 5
  std::optional<double> b_inf;
  std::string description;
};

StructureClass classify_structure(const SpectrumResult& r);

/// (gap, dim U) at one interior point per gap; throws kNonMonotoneProfile
/// unless dim U strictly decreases left to right.
std::vector<ResolventGap> resolvent_dimension_profile(const DichotomyEngine& engine, const SpectrumResult& r);
std::vector<ResolventGap> resolvent_dimension_profile(const Cocycle& c, const SpectrumResult& r,
                                                      const ScanConfig& cfg = {});

nlohmann::json to_json(const SpectrumResult& r);

/// shift,pass,dim_u,reason rows.
void write_trace_csv(const SpectrumResult& r, std::ostream& out);

}  // namespace sspec
