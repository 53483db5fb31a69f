// SPDX-License-Identifier: Apache-2.0
//
// Reference computations used only by the tests. They deliberately avoid the
// library's closed forms.
#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "maplace/design.hpp"

namespace maplace::oracle {

/// Objective of the three-point design in units of kappa d_R,max^2 / a^2.
inline long double three_point_objective(long double q, long double gamma) {
  return 1.0L / q + gamma / (q * (1.0L - q));
}

/// argmin over (0, 1) of 1/q + gamma/(q(1-q)): dense grid, then golden-section
/// refinement in extended precision around the best grid cell.
inline double argmin_three_point(double gamma_in) {
  const long double gamma = gamma_in;
  const int n = 20000;
  int best = 1;
  long double best_val = three_point_objective(1.0L / n, gamma);
  for (int i = 1; i < n; ++i) {
    const long double v = three_point_objective((long double)i / n, gamma);
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  long double lo = (long double)(best - 1) / n, hi = std::min((long double)(best + 1) / n, 1.0L - 1e-18L);
  if (lo <= 0) lo = 1e-18L;
  const long double phi = (std::sqrt(5.0L) - 1) / 2;
  long double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  long double f1 = three_point_objective(x1, gamma), f2 = three_point_objective(x2, gamma);
  for (int it = 0; it < 200 && hi - lo > 1e-15L; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = three_point_objective(x1, gamma);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = three_point_objective(x2, gamma);
    }
  }
  // gamma = 0 pushes the minimiser to the boundary q = 1
  if (gamma == 0) return 1.0;
  return double((lo + hi) / 2);
}

/// Random distribution on [-a, a] with `atoms` support points.
inline PlacementDistributiond random_distribution(std::mt19937_64& rng, int atoms, double a) {
  std::uniform_real_distribution<double> loc(-a, a), mass(0.0, 1.0);
  std::vector<double> s, w;
  while (int(s.size()) < atoms) {
    const double x = loc(rng);
    bool dup = false;
    for (double y : s) dup = dup || std::abs(x - y) < 1e-9 * a;
    if (dup) continue;
    s.push_back(x);
    w.push_back(mass(rng) + 1e-3);
  }
  double total = 0;
  for (double v : w) total += v;
  for (double& v : w) v /= total;
  using Map = Eigen::Map<const VectorX<double>>;
  return {Map(s.data(), Eigen::Index(s.size())), Map(w.data(), Eigen::Index(w.size())), a};
}

/// Random centro-symmetric distribution; an atom at 0 with probability 1/2.
inline PlacementDistributiond random_symmetric_distribution(std::mt19937_64& rng, int pairs, double a) {
  std::uniform_real_distribution<double> loc(1e-3 * a, a), mass(0.0, 1.0);
  std::vector<double> s, w;
  while (int(s.size()) < 2 * pairs) {
    const double x = loc(rng);
    bool dup = false;
    for (double y : s) dup = dup || std::abs(x - std::abs(y)) < 1e-9 * a;
    if (dup) continue;
    const double m = mass(rng) + 1e-3;
    s.push_back(x);
    w.push_back(m);
    s.push_back(-x);
    w.push_back(m);
  }
  if (mass(rng) < 0.5) {
    s.push_back(0.0);
    w.push_back(mass(rng) + 1e-3);
  }
  double total = 0;
  for (double v : w) total += v;
  for (double& v : w) v /= total;
  // re-pair exactly after normalisation
  for (std::size_t k = 0; k + 1 < 2 * std::size_t(pairs); k += 2) w[k + 1] = w[k];
  using Map = Eigen::Map<const VectorX<double>>;
  return {Map(s.data(), Eigen::Index(s.size())), Map(w.data(), Eigen::Index(w.size())), a};
}

}  // namespace maplace::oracle
