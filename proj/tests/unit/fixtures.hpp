#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "sspec/cocycle.hpp"

namespace fixtures {

inline sspec::Matrix diag(std::initializer_list<double> v) {
  sspec::Vector d(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) d[i++] = x;
  return d.asDiagonal();
}

inline sspec::BaseSystem fixed_point() { return sspec::BaseSystem::finite_periodic(1); }

inline sspec::Cocycle constant(const sspec::Matrix& m) {
  return sspec::Cocycle(fixed_point(), sspec::CocycleGenerator::constant(m));
}

inline sspec::Matrix upper_triangular() {
  sspec::Matrix m(2, 2);
  m << 2.0, 1.0, 0.0, 0.5;
  return m;
}

// A(q) = e^{c_{q_0}} on the 2-shift.
inline sspec::Cocycle scalar_shift(double c0 = 0.0, double c1 = 1.0) {
  return sspec::Cocycle(sspec::BaseSystem::full_shift(2),
                        sspec::CocycleGenerator::symbol_dependent(
                            {sspec::Matrix::Constant(1, 1, std::exp(c0)), sspec::Matrix::Constant(1, 1, std::exp(c1))},
                            2));
}

// c_1 raised to 1.5 on every 4-window with exactly one zero and q_0 = 1, so
// the orbit (0111) grows at 9/8.
inline sspec::Cocycle corrupted_shift() {
  std::vector<sspec::Matrix> m;
  for (int w = 0; w < 16; ++w) {
    const int q0 = (w >> 3) & 1;
    const int zeros = 4 - __builtin_popcount(w);
    const double c = q0 ? (zeros == 1 ? 1.5 : 1.0) : 0.0;
    m.push_back(sspec::Matrix::Constant(1, 1, std::exp(c)));
  }
  return sspec::Cocycle(sspec::BaseSystem::full_shift(2), sspec::CocycleGenerator::symbol_dependent(m, 2, 4));
}

inline sspec::Matrix random_matrix(int d, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  sspec::Matrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = u(rng);
  return m;
}

inline sspec::BasePoint random_window(int length, std::mt19937_64& rng, int alphabet = 2) {
  std::vector<sspec::Symbol> s(length);
  for (auto& x : s) x = static_cast<sspec::Symbol>(rng() % alphabet);
  return sspec::ShiftPoint::window(s, length / 2);
}

}  // namespace fixtures
