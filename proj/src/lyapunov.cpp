#include "sspec/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sspec/error.hpp"
#include "sspec/frames.hpp"
#include "sspec/quasicompactness.hpp"

namespace sspec {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Window forward_window(const Cocycle& c, int n) { return Window{0, n + c.generator().lookahead()}; }

double tail_rate(const Cocycle& c) {
  return c.model() ? c.model()->log_tail_per_step() - c.shift() : kNegInf;
}

// Benettin sums of log|R_kk| over [from, mid) and [mid, to) along the orbit of q.
std::pair<Vector, Vector> benettin(const Cocycle& c, const BasePoint& q, const Matrix& start, int from, int mid,
                                   int to) {
  const int d = c.dim();
  Vector early = Vector::Zero(d);
  Vector late = Vector::Zero(d);
  Matrix qj = start;
  Matrix qn;
  Matrix rj;
  BasePoint p = q;
  for (int j = 0; j < to; ++j) {
    signed_qr(linalg::multiply(c.generator_at(p), qj), qn, rj);
    if (j >= from) {
      Vector& sums = j < mid ? early : late;
      for (int k = 0; k < d; ++k) sums(k) += std::log(std::fabs(rj(k, k)));
    }
    qj = qn;
    p = iterate(c.base(), p, 1);
  }
  return {early, late};
}

Matrix start_frame(const Cocycle& c, std::uint64_t seed) {
  const auto& g = c.generator();
  if (g.is_constant() && g.is_diagonal()) {
    return sorting_permutation(std::get<ConstantGenerator>(g.kind()).matrix);
  }
  return linalg::random_orthogonal(c.dim(), seed);
}

void sort_descending(Vector& v) { std::sort(v.data(), v.data() + v.size(), std::greater<>()); }

}  // namespace

TopExponent top_exponent(const Cocycle& c, const ErgodicMeasure& mu, int n_max, std::uint64_t seed) {
  if (n_max < 8) throw Error(ErrorCode::kInvalidArgument, "top_exponent needs n_max >= 8");
  const auto points = typical_points(mu, c.base(), 8, seed, forward_window(c, n_max));
  const double tail = tail_rate(c);
  TopExponent out;
  double lo = std::numeric_limits<double>::infinity();
  double hi = kNegInf;
  double total = 0.0;
  for (const auto& q : points) {
    const double v = std::max(c.log_norm(q, n_max) / n_max, tail);
    total += v;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  out.samples = static_cast<int>(points.size());
  out.value = total / out.samples;
  out.spread = hi - lo;
  return out;
}

int LyapunovSpectrum::fast_dim() const {
  int k = 0;
  for (const auto& g : exponents) k += g.multiplicity;
  return k;
}

LyapunovSpectrum exponent_ladder(const Cocycle& c, const ErgodicMeasure& mu, int n_max, double resolution,
                                 std::uint64_t seed, const std::string& label) {
  if (n_max < 8) throw Error(ErrorCode::kInvalidArgument, "exponent_ladder needs n_max >= 8");
  if (!(resolution > 0.0)) throw Error(ErrorCode::kInvalidArgument, "resolution must be > 0");
  const int d = c.dim();
  const auto points = typical_points(mu, c.base(), 8, seed, forward_window(c, n_max));
  const Matrix start = start_frame(c, seed);
  const int skip = n_max / 4;
  const int mid = skip + (n_max - skip) / 2;

  Vector mean = Vector::Zero(d);
  Vector lo = Vector::Constant(d, std::numeric_limits<double>::infinity());
  Vector hi = Vector::Constant(d, kNegInf);
  Vector drift = Vector::Zero(d);
  for (const auto& q : points) {
    auto [early, late] = benettin(c, q, start, skip, mid, n_max);
    Vector v = (early + late) / (n_max - skip);
    Vector first = early / (mid - skip);
    Vector second = late / (n_max - mid);
    v.array() -= c.shift();
    first.array() -= c.shift();
    second.array() -= c.shift();
    sort_descending(v);
    sort_descending(first);
    sort_descending(second);
    for (int k = 0; k < d; ++k) {
      mean(k) += v(k);
      lo(k) = std::min(lo(k), v(k));
      hi(k) = std::max(hi(k), v(k));
      if (std::isfinite(first(k)) && std::isfinite(second(k))) {
        drift(k) = std::max(drift(k), std::fabs(first(k) - second(k)));
      }
    }
  }
  mean /= static_cast<double>(points.size());

  LyapunovSpectrum out;
  out.measure = label;
  out.n_max = n_max;
  out.resolution = resolution;
  out.kappa = c.model() ? kappa_estimate(c, *c.model(), mu, n_max, seed) : ExtendedReal::minus_infinity();
  out.raw.assign(mean.data(), mean.data() + d);

  const double fold_at = out.kappa.is_finite() ? out.kappa.value() + resolution : kNegInf;
  // Directions at or below the fold line go to the tail before clustering.
  int live = 0;
  while (live < d && std::isfinite(mean(live)) && mean(live) > fold_at) ++live;
  int k = 0;
  while (k < live) {
    ExponentGroup g;
    double sum = 0.0;
    int j = k;
    do {
      sum += mean(j);
      g.spread = std::max(g.spread, std::isfinite(hi(j) - lo(j)) ? hi(j) - lo(j) : 0.0);
      g.drift = std::max(g.drift, drift(j));
      ++j;
    } while (j < live && mean(j - 1) - mean(j) <= resolution);
    g.multiplicity = j - k;
    g.lambda = sum / g.multiplicity;
    if (j < live) {
      const double gap = mean(j - 1) - mean(j);
      if (gap < 2.0 * resolution) out.ambiguous = true;
    }
    out.exponents.push_back(g);
    k = j;
  }
  out.folded = d - k;
  return out;
}

OseledetsSplitting oseledets_splitting(const Cocycle& c, const LyapunovSpectrum& spectrum, const BasePoint& q,
                                       int n_max, std::uint64_t seed) {
  if (n_max < 1) throw Error(ErrorCode::kInvalidArgument, "n_max must be >= 1");
  const int d = c.dim();
  const int fast = spectrum.fast_dim();
  if (fast > d) throw Error(ErrorCode::kDimensionMismatch, "spectrum does not belong to this cocycle");
  const OrbitFrames frames(c, q, n_max, n_max, std::max(64, n_max), seed);

  auto fast_space = [&](int j, int k_prev, int m) -> Matrix {
    const Matrix g = frames.unstable(j, k_prev + m);
    if (k_prev == 0) return g;
    const Matrix w = frames.adjoint(j).leftCols(k_prev);
    Eigen::JacobiSVD<Matrix> svd(w.transpose() * g, Eigen::ComputeFullV);
    return g * svd.matrixV().rightCols(m);
  };

  OseledetsSplitting out;
  out.q = q;
  int k_prev = 0;
  for (const auto& group : spectrum.exponents) {
    const Matrix e0 = fast_space(0, k_prev, group.multiplicity);
    const Matrix e1 = fast_space(1, k_prev, group.multiplicity);
    const Matrix image = linalg::multiply(frames.generator(0), e0);
    const Vector sv = linalg::singular_values(image);
    if (sv.size() == 0 || !(sv(sv.size() - 1) > 1e-12 * std::max(sv(0), 1e-300))) {
      out.rank_collapse = true;
      out.defects.push_back(M_PI / 2);
    } else {
      out.defects.push_back(linalg::principal_angle(linalg::orthonormal_factor(image), e1));
    }
    out.fast.push_back(e0);
    k_prev += group.multiplicity;
  }

  out.min_transversality = M_PI / 2;
  for (std::size_t i = 0; i < out.fast.size(); ++i) {
    for (std::size_t l = i + 1; l < out.fast.size(); ++l) {
      const double cosine = std::min(1.0, linalg::op_norm(out.fast[i].transpose() * out.fast[l]));
      out.min_transversality = std::min(out.min_transversality, std::acos(cosine));
    }
  }

  out.slow = frames.stable(0, fast);
  double head = kNegInf;
  if (fast < d) {
    linalg::LogScaledProduct acc(Matrix::Identity(d - fast, d - fast));
    for (int j = 0; j < n_max; ++j) {
      acc.left_multiply(frames.stable(j + 1, fast).transpose() * frames.generator(j) * frames.stable(j, fast));
    }
    head = acc.log_norm() / n_max - c.shift();
  }
  out.slow_growth = std::max(head, c.model() ? c.model()->log_tail_per_step() - c.shift() : kNegInf);
  return out;
}

nlohmann::json to_json(const LyapunovSpectrum& s) {
  nlohmann::json ex = nlohmann::json::array();
  for (const auto& g : s.exponents) ex.push_back({{"lambda", g.lambda}, {"multiplicity", g.multiplicity}});
  nlohmann::json diag = nlohmann::json::array();
  for (const auto& g : s.exponents) diag.push_back({{"spread", g.spread}, {"drift", g.drift}});
  return {
      {"measure", s.measure},
      {"n_max", s.n_max},
      {"exponents", ex},
      {"kappa", s.kappa.is_finite() ? nlohmann::json(s.kappa.value()) : nlohmann::json("-inf")},
      {"diagnostics",
       {{"resolution", s.resolution}, {"folded_dims", s.folded}, {"ambiguous", s.ambiguous}, {"groups", diag}}},
  };
}

}  // namespace sspec
