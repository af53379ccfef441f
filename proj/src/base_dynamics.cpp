#include "sspec/base_dynamics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "sspec/error.hpp"

namespace sspec {
namespace {

std::int64_t floor_mod(std::int64_t a, std::int64_t m) {
  const std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

double wrap_unit(double x) {
  double r = x - std::floor(x);
  if (r >= 1.0) r = 0.0;
  return r;
}

double circle_distance(double a, double b) {
  const double d = std::fabs(a - b);
  return std::min(d, 1.0 - d);
}

[[noreturn]] void mismatch(const std::string& what) {
  throw Error(ErrorCode::kVariantMismatch, what);
}

// 53-bit uniform in [0, 1); independent of the standard library's distributions
// so sampled words are identical across toolchains.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Symbol draw_symbol(std::mt19937_64& rng, const std::vector<double>& p) {
  const double u = uniform01(rng);
  double acc = 0.0;
  for (std::size_t s = 0; s + 1 < p.size(); ++s) {
    acc += p[s];
    if (u < acc) return static_cast<Symbol>(s);
  }
  // u beyond the last cumulative break lands on the last symbol with positive mass
  for (std::size_t s = p.size(); s-- > 0;) {
    if (p[s] > 0.0) return static_cast<Symbol>(s);
  }
  return 0;
}

std::string word_label(const std::vector<Symbol>& w, int alphabet) {
  std::string out = "per:";
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (alphabet > 10 && i > 0) out += '.';
    out += std::to_string(static_cast<int>(w[i]));
  }
  return out;
}

}  // namespace

ShiftPoint ShiftPoint::periodic_word(std::vector<Symbol> word, std::int64_t offset) {
  if (word.empty()) throw Error(ErrorCode::kInvalidArgument, "shift buffer must be non-empty");
  const auto p = static_cast<std::int64_t>(word.size());
  return ShiftPoint{std::make_shared<const std::vector<Symbol>>(std::move(word)), floor_mod(offset, p),
                    true};
}

ShiftPoint ShiftPoint::window(std::vector<Symbol> symbols, std::int64_t origin) {
  if (symbols.empty()) throw Error(ErrorCode::kInvalidArgument, "shift buffer must be non-empty");
  if (origin < 0 || origin >= static_cast<std::int64_t>(symbols.size())) {
    throw Error(ErrorCode::kInvalidArgument, "shift origin outside its buffer");
  }
  return ShiftPoint{std::make_shared<const std::vector<Symbol>>(std::move(symbols)), origin, false};
}

Symbol ShiftPoint::at(std::int64_t j) const {
  const auto size = static_cast<std::int64_t>(symbols->size());
  if (periodic) return (*symbols)[static_cast<std::size_t>(floor_mod(offset + j, size))];
  const std::int64_t pos = offset + j;
  if (pos < 0 || pos >= size) {
    std::ostringstream msg;
    msg << "shift window too short: coordinate " << j << " needs window [" << -offset << ", "
        << size - offset - 1 << "] extended to include it";
    throw Error(ErrorCode::kWindowTooShort, msg.str());
  }
  return (*symbols)[static_cast<std::size_t>(pos)];
}

bool ShiftPoint::covers(std::int64_t from, std::int64_t to) const {
  if (periodic) return true;
  const auto size = static_cast<std::int64_t>(symbols->size());
  return offset + from >= 0 && offset + to < size;
}

BaseSystem BaseSystem::full_shift(int alphabet) {
  if (alphabet < 1) throw Error(ErrorCode::kInvalidArgument, "alphabet size must be >= 1");
  if (alphabet > 256) throw Error(ErrorCode::kInvalidArgument, "alphabet size must be <= 256");
  return BaseSystem(FullShift{alphabet});
}

BaseSystem BaseSystem::circle_rotation(double rho) {
  if (!(rho > 0.0 && rho < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "rotation number must lie in (0, 1)");
  }
  return BaseSystem(CircleRotation{rho});
}

BaseSystem BaseSystem::finite_periodic(int period) {
  if (period < 1) throw Error(ErrorCode::kInvalidArgument, "period must be >= 1");
  return BaseSystem(FinitePeriodic{period});
}

int BaseSystem::symbol_count() const {
  if (const auto* s = std::get_if<FullShift>(&kind_)) return s->alphabet;
  if (const auto* p = std::get_if<FinitePeriodic>(&kind_)) return p->period;
  return 0;
}

void BaseSystem::check_point(const BasePoint& q) const {
  if (const auto* s = std::get_if<FullShift>(&kind_)) {
    const auto* sp = std::get_if<ShiftPoint>(&q);
    if (sp == nullptr) mismatch("expected a shift point");
    if (!sp->symbols || sp->symbols->empty()) {
      throw Error(ErrorCode::kInvalidArgument, "shift buffer must be non-empty");
    }
    for (Symbol x : *sp->symbols) {
      if (x >= s->alphabet) throw Error(ErrorCode::kInvalidArgument, "symbol outside alphabet");
    }
  } else if (std::holds_alternative<CircleRotation>(kind_)) {
    const auto* cp = std::get_if<CirclePoint>(&q);
    if (cp == nullptr) mismatch("expected a circle point");
    if (!(cp->angle >= 0.0 && cp->angle < 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "circle angle must lie in [0, 1)");
    }
  } else {
    const auto& per = std::get<FinitePeriodic>(kind_);
    const auto* op = std::get_if<OrbitPoint>(&q);
    if (op == nullptr) mismatch("expected an orbit index");
    if (op->index < 0 || op->index >= per.period) {
      throw Error(ErrorCode::kInvalidArgument, "orbit index must lie in [0, period)");
    }
  }
}

bool BaseSystem::same_point(const BasePoint& a, const BasePoint& b) const {
  if (a.index() != b.index()) return false;
  if (const auto* ca = std::get_if<CirclePoint>(&a)) {
    return circle_distance(ca->angle, std::get<CirclePoint>(b).angle) <= tolerance_;
  }
  if (const auto* oa = std::get_if<OrbitPoint>(&a)) return oa->index == std::get<OrbitPoint>(b).index;
  const auto& sa = std::get<ShiftPoint>(a);
  const auto& sb = std::get<ShiftPoint>(b);
  if (sa.periodic && sb.periodic) {
    // compare one full period of each, aligned at coordinate 0
    const auto pa = static_cast<std::int64_t>(sa.symbols->size());
    const auto pb = static_cast<std::int64_t>(sb.symbols->size());
    const std::int64_t span = std::lcm(pa, pb);
    for (std::int64_t j = 0; j < span; ++j) {
      if (sa.at(j) != sb.at(j)) return false;
    }
    return true;
  }
  // common stored window
  auto range = [](const ShiftPoint& s) {
    if (s.periodic) return std::pair<std::int64_t, std::int64_t>{-(1LL << 40), 1LL << 40};
    const auto size = static_cast<std::int64_t>(s.symbols->size());
    return std::pair<std::int64_t, std::int64_t>{-s.offset, size - s.offset - 1};
  };
  const auto [la, ha] = range(sa);
  const auto [lb, hb] = range(sb);
  const std::int64_t lo = std::max(la, lb);
  const std::int64_t hi = std::min(ha, hb);
  if (lo > 0 || hi < 0) return false;
  for (std::int64_t j = lo; j <= hi; ++j) {
    if (sa.at(j) != sb.at(j)) return false;
  }
  return true;
}

BasePoint iterate(const BaseSystem& system, const BasePoint& q, std::int64_t n) {
  return std::visit(
      [&](const auto& kind) -> BasePoint {
        using K = std::decay_t<decltype(kind)>;
        if constexpr (std::is_same_v<K, FullShift>) {
          const auto* sp = std::get_if<ShiftPoint>(&q);
          if (sp == nullptr) mismatch("iterate: expected a shift point");
          ShiftPoint out = *sp;
          if (out.periodic) {
            out.offset = floor_mod(out.offset + n, static_cast<std::int64_t>(out.symbols->size()));
          } else {
            out.offset += n;
          }
          return out;
        } else if constexpr (std::is_same_v<K, CircleRotation>) {
          const auto* cp = std::get_if<CirclePoint>(&q);
          if (cp == nullptr) mismatch("iterate: expected a circle point");
          return CirclePoint{wrap_unit(cp->angle + static_cast<double>(n) * kind.rho)};
        } else {
          const auto* op = std::get_if<OrbitPoint>(&q);
          if (op == nullptr) mismatch("iterate: expected an orbit index");
          return OrbitPoint{floor_mod(op->index + n, kind.period)};
        }
      },
      system.kind());
}

ErgodicMeasure ErgodicMeasure::periodic_orbit(const BaseSystem& system, std::vector<BasePoint> points) {
  if (points.empty()) throw Error(ErrorCode::kInvalidArgument, "periodic orbit needs at least one point");
  for (const auto& p : points) system.check_point(p);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const BasePoint next = iterate(system, points[i], 1);
    if (!system.same_point(next, points[(i + 1) % points.size()])) {
      throw Error(ErrorCode::kInvalidArgument, "listed points do not form an f-cycle");
    }
  }
  return ErgodicMeasure{PeriodicOrbit{std::move(points)}};
}

ErgodicMeasure ErgodicMeasure::bernoulli(std::vector<double> probabilities) {
  if (probabilities.empty()) throw Error(ErrorCode::kInvalidArgument, "Bernoulli vector is empty");
  double total = 0.0;
  for (double p : probabilities) {
    if (!(p >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "Bernoulli probabilities must be >= 0");
    total += p;
  }
  if (std::fabs(total - 1.0) > 1e-12) {
    throw Error(ErrorCode::kInvalidArgument, "Bernoulli probabilities must sum to 1");
  }
  return ErgodicMeasure{Bernoulli{std::move(probabilities)}};
}

std::size_t ErgodicMeasure::period() const {
  if (const auto* p = std::get_if<PeriodicOrbit>(&kind)) return p->points.size();
  return 0;
}

void MeasureFamily::add(std::string label, ErgodicMeasure measure) {
  if (find(label) != nullptr) {
    throw Error(ErrorCode::kInvalidArgument, "duplicate measure label '" + label + "'");
  }
  members_.push_back({std::move(label), std::move(measure)});
}

bool MeasureFamily::remove(const std::string& label) {
  const auto it = std::find_if(members_.begin(), members_.end(),
                               [&](const LabeledMeasure& m) { return m.label == label; });
  if (it == members_.end()) return false;
  members_.erase(it);
  return true;
}

const LabeledMeasure* MeasureFamily::find(const std::string& label) const {
  for (const auto& m : members_) {
    if (m.label == label) return &m;
  }
  return nullptr;
}

std::vector<BasePoint> sample_orbit(const ErgodicMeasure& measure, const BaseSystem& system,
                                    std::int64_t length, std::uint64_t seed, Window window) {
  if (length < 1) throw Error(ErrorCode::kInvalidArgument, "sample length must be >= 1");
  if (window.lookback < 0 || window.lookahead < 0) {
    throw Error(ErrorCode::kInvalidArgument, "sample window must be nonnegative");
  }
  BasePoint start;
  if (const auto* po = std::get_if<PeriodicOrbit>(&measure.kind)) {
    system.check_point(po->points.front());
    start = po->points.front();
  } else if (const auto* b = std::get_if<Bernoulli>(&measure.kind)) {
    const auto* shift = std::get_if<FullShift>(&system.kind());
    if (shift == nullptr) mismatch("Bernoulli measure needs a full shift");
    if (static_cast<int>(b->probabilities.size()) != shift->alphabet) {
      mismatch("Bernoulli vector length differs from the alphabet size");
    }
    std::mt19937_64 rng(seed);
    const std::int64_t total = window.lookback + length + window.lookahead;
    std::vector<Symbol> word(static_cast<std::size_t>(total));
    for (auto& s : word) s = draw_symbol(rng, b->probabilities);
    start = ShiftPoint::window(std::move(word), window.lookback);
  } else {
    if (!system.is_circle()) mismatch("Lebesgue measure needs a circle rotation");
    std::mt19937_64 rng(seed);
    start = CirclePoint{uniform01(rng)};
  }
  std::vector<BasePoint> orbit;
  orbit.reserve(static_cast<std::size_t>(length));
  orbit.push_back(start);
  for (std::int64_t i = 1; i < length; ++i) orbit.push_back(iterate(system, orbit.back(), 1));
  return orbit;
}

std::vector<BasePoint> typical_points(const ErgodicMeasure& measure, const BaseSystem& system, int count,
                                      std::uint64_t seed, Window window) {
  if (count < 1) throw Error(ErrorCode::kInvalidArgument, "sample count must be >= 1");
  if (const auto* po = std::get_if<PeriodicOrbit>(&measure.kind)) {
    for (const auto& p : po->points) system.check_point(p);
    return po->points;
  }
  std::vector<BasePoint> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    out.push_back(sample_orbit(measure, system, 1, seed + static_cast<std::uint64_t>(i), window).front());
  }
  return out;
}

MeasureFamily periodic_measures(const BaseSystem& system, int p_max) {
  if (p_max < 1) throw Error(ErrorCode::kInvalidArgument, "p_max must be >= 1");
  MeasureFamily family;
  if (const auto* shift = std::get_if<FullShift>(&system.kind())) {
    // Duval's generation of Lyndon words: one word per primitive cycle.
    const int k = shift->alphabet;
    std::vector<int> w{-1};
    while (!w.empty()) {
      ++w.back();
      std::vector<Symbol> word(w.begin(), w.end());
      const ShiftPoint first = ShiftPoint::periodic_word(word);
      std::vector<BasePoint> points;
      for (std::size_t r = 0; r < word.size(); ++r) {
        ShiftPoint p = first;
        p.offset = static_cast<std::int64_t>(r);
        points.push_back(p);
      }
      family.add(word_label(word, k), ErgodicMeasure{PeriodicOrbit{std::move(points)}});
      const std::size_t m = w.size();
      while (w.size() < static_cast<std::size_t>(p_max)) w.push_back(w[w.size() - m]);
      while (!w.empty() && w.back() == k - 1) w.pop_back();
    }
  } else if (const auto* per = std::get_if<FinitePeriodic>(&system.kind())) {
    if (per->period <= p_max) {
      std::vector<BasePoint> points;
      for (int i = 0; i < per->period; ++i) points.push_back(OrbitPoint{i});
      family.add("orbit", ErgodicMeasure{PeriodicOrbit{std::move(points)}});
    }
  } else {
    family.add("lebesgue", ErgodicMeasure::lebesgue());
  }
  return family;
}

std::vector<BasePoint> orbit_points(const MeasureFamily& family) {
  std::vector<BasePoint> out;
  for (const auto& m : family.members()) {
    if (const auto* po = std::get_if<PeriodicOrbit>(&m.measure.kind)) {
      out.insert(out.end(), po->points.begin(), po->points.end());
    }
  }
  return out;
}

PointKey point_key(const BasePoint& q) {
  if (const auto* sp = std::get_if<ShiftPoint>(&q)) {
    return PointKey{sp->symbols.get(), sp->offset, 0, 0};
  }
  if (const auto* cp = std::get_if<CirclePoint>(&q)) {
    return PointKey{nullptr, 0, std::bit_cast<std::uint64_t>(cp->angle), 1};
  }
  return PointKey{nullptr, std::get<OrbitPoint>(q).index, 0, 2};
}

std::size_t PointKeyHash::operator()(const PointKey& k) const noexcept {
  std::size_t h = std::hash<const void*>{}(k.buffer);
  auto mix = [&h](std::uint64_t v) { h ^= std::hash<std::uint64_t>{}(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
  mix(static_cast<std::uint64_t>(k.position));
  mix(k.bits);
  mix(static_cast<std::uint64_t>(k.tag));
  return h;
}

std::string describe(const BasePoint& q) {
  std::ostringstream out;
  if (const auto* sp = std::get_if<ShiftPoint>(&q)) {
    out << (sp->periodic ? "periodic word " : "window ");
    const std::int64_t show = sp->periodic ? static_cast<std::int64_t>(sp->symbols->size()) : 8;
    for (std::int64_t j = 0; j < show && sp->covers(j, j); ++j) out << static_cast<int>(sp->at(j));
  } else if (const auto* cp = std::get_if<CirclePoint>(&q)) {
    out << "angle " << cp->angle;
  } else {
    out << "orbit index " << std::get<OrbitPoint>(q).index;
  }
  return out.str();
}

}  // namespace sspec
