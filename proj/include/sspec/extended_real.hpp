#pragma once

#include <cmath>
#include <compare>
#include <limits>
#include <string>

namespace sspec {

/// A real number or the sentinel -infinity.
///
/// Used for growth rates such as kappa(mu) that may legitimately be -inf
/// (finite-dimensional operators have vanishing measure of noncompactness).
/// The sentinel compares below every real.
class ExtendedReal {
 public:
  constexpr ExtendedReal() = default;
  constexpr explicit ExtendedReal(double v) : v_(v != v ? kNegInf : v) {}

  static constexpr ExtendedReal minus_infinity() { return ExtendedReal(); }

  constexpr bool is_minus_infinity() const { return v_ == kNegInf; }
  constexpr bool is_finite() const { return !is_minus_infinity(); }

  /// IEEE value; the sentinel maps to -inf.
  constexpr double value() const { return v_; }

  constexpr auto operator<=>(const ExtendedReal& o) const { return v_ <=> o.v_; }
  constexpr bool operator==(const ExtendedReal& o) const { return v_ == o.v_; }

  friend constexpr ExtendedReal max(ExtendedReal a, ExtendedReal b) {
    return a < b ? b : a;
  }

  std::string to_string() const;

 private:
  static constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  double v_ = kNegInf;
};

}  // namespace sspec
