#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace sspec {

using Symbol = std::uint8_t;

/// A point of a full shift, stored as a finite window of coordinates.
///
/// Coordinate j of the point is `symbols[offset + j]`. Periodic points repeat
/// their buffer bi-infinitely and so have unbounded windows.
struct ShiftPoint {
  std::shared_ptr<const std::vector<Symbol>> symbols;
  std::int64_t offset = 0;
  bool periodic = false;

  static ShiftPoint periodic_word(std::vector<Symbol> word, std::int64_t offset = 0);
  static ShiftPoint window(std::vector<Symbol> symbols, std::int64_t origin);

  /// Coordinate j; throws kWindowTooShort outside the stored window.
  Symbol at(std::int64_t j) const;

  /// True when coordinates from..to (inclusive) are stored.
  bool covers(std::int64_t from, std::int64_t to) const;
};

struct CirclePoint {
  double angle = 0.0;  // in [0, 1)
};

struct OrbitPoint {
  std::int64_t index = 0;  // in [0, period)
};

using BasePoint = std::variant<ShiftPoint, CirclePoint, OrbitPoint>;

struct FullShift {
  int alphabet = 2;
};
struct CircleRotation {
  double rho = 0.0;
};
struct FinitePeriodic {
  int period = 1;
};

/// A compact base space M together with a homeomorphism f.
class BaseSystem {
 public:
  using Kind = std::variant<FullShift, CircleRotation, FinitePeriodic>;

  static BaseSystem full_shift(int alphabet);
  static BaseSystem circle_rotation(double rho);
  static BaseSystem finite_periodic(int period);

  const Kind& kind() const { return kind_; }
  double tolerance() const { return tolerance_; }

  bool is_shift() const { return std::holds_alternative<FullShift>(kind_); }
  bool is_circle() const { return std::holds_alternative<CircleRotation>(kind_); }
  bool is_periodic() const { return std::holds_alternative<FinitePeriodic>(kind_); }

  /// Alphabet size for shifts, period for finite orbits, 0 for rotations.
  int symbol_count() const;

  /// Throws kVariantMismatch / kInvalidArgument if q is not a point of this system.
  void check_point(const BasePoint& q) const;

  /// Equality up to the system's tolerance (exact for shift and orbit points;
  /// shift points compare their common stored window).
  bool same_point(const BasePoint& a, const BasePoint& b) const;

 private:
  explicit BaseSystem(Kind kind) : kind_(std::move(kind)) {}

  Kind kind_;
  double tolerance_ = 1e-9;
};

/// f^n(q) for any signed n.
BasePoint iterate(const BaseSystem& system, const BasePoint& q, std::int64_t n);

struct PeriodicOrbit {
  std::vector<BasePoint> points;
};
struct Bernoulli {
  std::vector<double> probabilities;
};
struct LebesgueCircle {};

/// An ergodic f-invariant probability measure, sampleable as orbits.
struct ErgodicMeasure {
  std::variant<PeriodicOrbit, Bernoulli, LebesgueCircle> kind;

  /// Validates that the points form an f-cycle.
  static ErgodicMeasure periodic_orbit(const BaseSystem& system, std::vector<BasePoint> points);
  /// Validates nonnegativity and unit mass (1e-12).
  static ErgodicMeasure bernoulli(std::vector<double> probabilities);
  static ErgodicMeasure lebesgue() { return ErgodicMeasure{LebesgueCircle{}}; }

  bool is_periodic() const { return std::holds_alternative<PeriodicOrbit>(kind); }
  std::size_t period() const;
};

struct LabeledMeasure {
  std::string label;
  ErgodicMeasure measure;
};

/// Ordered list of measures with unique labels.
class MeasureFamily {
 public:
  void add(std::string label, ErgodicMeasure measure);
  /// Removes a member by label; returns false if absent.
  bool remove(const std::string& label);

  const std::vector<LabeledMeasure>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  const LabeledMeasure* find(const std::string& label) const;

 private:
  std::vector<LabeledMeasure> members_;
};

/// Coordinates a sampled point must carry before and after itself.
struct Window {
  std::int64_t lookback = 0;
  std::int64_t lookahead = 0;
};

/// (q, f(q), ..., f^{length-1}(q)) for a mu-typical q. Bernoulli symbols come
/// from std::mt19937_64(seed) by inverse CDF on 53-bit uniforms; Lebesgue
/// starting angles from the same generator.
std::vector<BasePoint> sample_orbit(const ErgodicMeasure& measure, const BaseSystem& system,
                                    std::int64_t length, std::uint64_t seed, Window window = {});

/// mu-typical starting points: every point of a periodic orbit, otherwise
/// `count` independent draws (seeds seed, seed+1, ...).
std::vector<BasePoint> typical_points(const ErgodicMeasure& measure, const BaseSystem& system, int count,
                                      std::uint64_t seed, Window window = {});

/// All periodic-orbit measures of period <= p_max, one per cycle. Labels are
/// "per:<lyndon word>" on shifts, "orbit" on finite orbits and "lebesgue" on
/// rotations (which carry no periodic orbits).
MeasureFamily periodic_measures(const BaseSystem& system, int p_max);

/// Every point of every periodic orbit in the family, in family order.
std::vector<BasePoint> orbit_points(const MeasureFamily& family);

/// Hashable identity of a point, used by product caches.
struct PointKey {
  const void* buffer = nullptr;
  std::int64_t position = 0;
  std::uint64_t bits = 0;
  int tag = 0;
  bool operator==(const PointKey&) const = default;
};

PointKey point_key(const BasePoint& q);

struct PointKeyHash {
  std::size_t operator()(const PointKey& k) const noexcept;
};

std::string describe(const BasePoint& q);

}  // namespace sspec
