// SPDX-License-Identifier: Apache-2.0
//
// Worst-case SPEB over a discretised near-field region and the exhaustive
// placement search used as a reference optimum.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "maplace/crb.hpp"
#include "maplace/errors.hpp"
#include "maplace/geometry.hpp"
#include "maplace/parallel.hpp"

namespace maplace {

/// Sampled near-field region.
///
/// Angles are u_i = u_max (2i - (n_u-1)) / (n_u-1), ranges are uniform on
/// [d_F(u), d_R(u)] with both endpoints exact. Refining n -> 2n-1 keeps every
/// previous sample bit-for-bit, so worst-case values never drop under
/// refinement. u = 0 and r = d_R,max are always present.
template <typename Scalar>
class RegionGrid {
 public:
  RegionGrid(const NearFieldRegion<Scalar>& region, long n_u, long n_r) : region_(region), n_u_(n_u), n_r_(n_r) {
    if (n_u < 1 || n_r < 1) fail(ErrorCode::InvalidArgument, "grid resolutions must be positive");
    std::vector<Scalar> us;
    if (n_u == 1) {
      us.push_back(Scalar(0));
    } else {
      for (long i = 0; i < n_u; ++i)
        us.push_back(region.u_max() * (Scalar(2 * i - (n_u - 1)) / Scalar(n_u - 1)));
      if (n_u % 2 == 0) us.insert(us.begin() + n_u / 2, Scalar(0));
    }
    for (Scalar u : us) {
      if (!region.admissible(u)) continue;
      const Scalar lo = region.fresnel(u);
      const Scalar hi = region.rayleigh(u);
      for (long j = 0; j < n_r; ++j) {
        Scalar r = hi;
        if (j + 1 < n_r) r = std::min(hi, lo + (Scalar(j) / Scalar(n_r - 1)) * (hi - lo));
        points_.emplace_back(u, r);
      }
    }
  }

  /// Arbitrary points; each must lie in the region.
  RegionGrid(const NearFieldRegion<Scalar>& region, std::vector<SourcePosition<Scalar>> points)
      : region_(region), n_u_(0), n_r_(0), points_(std::move(points)) {
    for (const auto& p : points_)
      if (!region.contains(p)) fail(ErrorCode::InvalidArgument, "grid point lies outside the near-field region");
  }

  RegionGrid refined() const { return RegionGrid(region_, 2 * n_u_ - 1, 2 * n_r_ - 1); }

  const NearFieldRegion<Scalar>& region() const { return region_; }
  const std::vector<SourcePosition<Scalar>>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  long n_u() const { return n_u_; }
  long n_r() const { return n_r_; }

 private:
  NearFieldRegion<Scalar> region_;
  long n_u_;
  long n_r_;
  std::vector<SourcePosition<Scalar>> points_;
};

template <typename Scalar>
struct DesignReport {
  std::string label;
  Scalar worst_case_speb;
  SourcePosition<Scalar> worst_case_source;
  std::size_t grid_points;
  std::size_t evaluated_points;
  long n_u;
  long n_r;
};

namespace detail {

template <typename Scalar>
struct GridMax {
  bool valid = false;
  Scalar value = 0;
  Scalar u = 0;
  Scalar r = 0;
  std::size_t evaluated = 0;

  // Larger value wins; ties go to smaller |u|, then larger r, then larger u.
  bool beats(const GridMax& o) const {
    if (!valid) return false;
    if (!o.valid) return true;
    if (value != o.value) return value > o.value;
    if (std::abs(u) != std::abs(o.u)) return std::abs(u) < std::abs(o.u);
    if (r != o.r) return r > o.r;
    return u > o.u;
  }

  static GridMax merge(const GridMax& a, const GridMax& b) {
    GridMax out = b.beats(a) ? b : a;
    out.evaluated = a.evaluated + b.evaluated;
    return out;
  }
};

template <typename Scalar, typename Eval>
GridMax<Scalar> grid_max_range(const RegionGrid<Scalar>& grid, const Eval& eval, std::size_t begin, std::size_t end) {
  GridMax<Scalar> best;
  for (std::size_t i = begin; i < end; ++i) {
    const auto& p = grid.points()[i];
    GridMax<Scalar> c;
    try {
      c.value = eval(p.u(), p.r());
    } catch (const Error&) {
      continue;
    }
    c.valid = std::isfinite(double(c.value));
    if (!c.valid) continue;
    c.u = p.u();
    c.r = p.r();
    c.evaluated = 1;
    best = GridMax<Scalar>::merge(best, c);
  }
  return best;
}

template <typename Scalar, typename Eval>
DesignReport<Scalar> worst_case(const RegionGrid<Scalar>& grid, const Eval& eval, unsigned threads,
                                std::string label) {
  if (grid.size() == 0) fail(ErrorCode::InvalidArgument, "evaluation grid is empty");
  const auto best = parallel_map_reduce(
      grid.size(), GridMax<Scalar>{},
      [&](std::size_t b, std::size_t e) { return grid_max_range(grid, eval, b, e); },
      [](const GridMax<Scalar>& a, const GridMax<Scalar>& b) { return GridMax<Scalar>::merge(a, b); }, threads);
  if (!best.valid) fail(ErrorCode::AllPointsDegenerate, "SPEB could not be evaluated at any grid point");
  return {std::move(label), best.value, SourcePosition<Scalar>(best.u, best.r), grid.size(), best.evaluated,
          grid.n_u(), grid.n_r()};
}

}  // namespace detail

/// max over the grid of the SPEB of an explicit array.
template <typename Scalar>
DesignReport<Scalar> worst_case_speb(const ArrayGeometry<Scalar>& array, Scalar kappa_value,
                                     const RegionGrid<Scalar>& grid, unsigned threads = 0,
                                     std::string label = "array") {
  const detail::ArraySpeb<Scalar> ev(sample_moments(array), array.half_aperture(), kappa_value);
  return detail::worst_case(grid, [&](Scalar u, Scalar r) { return ev.speb(u, r); }, threads, std::move(label));
}

template <typename Scalar>
DesignReport<Scalar> worst_case_speb(const ArrayGeometry<Scalar>& array, const SensingParams<Scalar>& params,
                                     const RegionGrid<Scalar>& grid, unsigned threads = 0,
                                     std::string label = "array") {
  detail::check_antenna_count(array, params);
  return worst_case_speb(array, kappa(params), grid, threads, std::move(label));
}

/// max over the grid of the distribution-level SPEB (quadratic functional of the inverse moment matrix).
template <typename Scalar>
DesignReport<Scalar> worst_case_speb(const MomentMatrix<Scalar>& moments, Scalar kappa_value,
                                     const RegionGrid<Scalar>& grid, unsigned threads = 0,
                                     std::string label = "distribution") {
  const detail::DistributionSpeb<Scalar> ev(moments, kappa_value);
  return detail::worst_case(grid, [&](Scalar u, Scalar r) { return ev.speb(u, r); }, threads, std::move(label));
}

/// SPEB along the Rayleigh boundary r = d_R,max (1 - u^2) for symmetric moments:
///   kappa [ d^2 (1 + 3u^2) / Var(X) + 4 d^4 (1 - u^2)^2 / Var(X^2) ],  d = d_R,max.
template <typename Scalar>
Scalar boundary_speb_profile(const MomentMatrix<Scalar>& moments, Scalar kappa_value, Scalar max_rayleigh,
                             Scalar u) {
  if (std::abs(moments.cov_x_x2()) > Scalar(1e-12) * std::sqrt(moments.var_x() * moments.var_x2()))
    fail(ErrorCode::InvalidArgument, "boundary profile requires symmetric moments");
  if (!(std::abs(u) <= 1)) fail(ErrorCode::DomainError, "|u| must not exceed 1");
  const Scalar d2 = max_rayleigh * max_rayleigh;
  const Scalar s2 = 1 - u * u;
  return kappa_value * (d2 * (1 + 3 * u * u) / moments.var_x() + 4 * d2 * d2 * s2 * s2 / moments.var_x2());
}

/// Closed-form worst case of a symmetric distribution, attained at (u, r) = (0, d_R,max).
template <typename Scalar>
Scalar broadside_worst_case(const MomentMatrix<Scalar>& moments, Scalar kappa_value, Scalar max_rayleigh) {
  return boundary_speb_profile(moments, kappa_value, max_rayleigh, Scalar(0));
}

// ---------------------------------------------------------------------------
// Exhaustive search

template <typename Scalar>
struct ExhaustiveOptions {
  Scalar pitch;                  // candidate spacing, >= lambda/2
  bool symmetry_prune = true;    // only centro-symmetric subsets
  double budget = 5e7;           // max subsets x grid points
  unsigned threads = 0;
};

template <typename Scalar>
struct ExhaustiveResult {
  ArrayGeometry<Scalar> geometry;
  DesignReport<Scalar> report;
  std::uint64_t subsets;
  std::uint64_t degenerate_subsets;
};

/// Candidate locations a (2k - M)/M, k = 0..M, with M = floor(2a / pitch).
/// The effective pitch 2a/M is never below the requested one, and the set is an exact mirror image of itself.
template <typename Scalar>
std::vector<Scalar> candidate_locations(Scalar half_aperture, Scalar pitch) {
  if (!(half_aperture > 0) || !(pitch > 0)) fail(ErrorCode::InvalidArgument, "aperture and pitch must be positive");
  const long m = long(std::floor(2 * half_aperture / pitch * (1 + Scalar(1e-12))));
  if (m < 1) fail(ErrorCode::InfeasibleAperture, "pitch exceeds the aperture");
  std::vector<Scalar> out;
  for (long k = 0; k <= m; ++k) out.push_back(half_aperture * (Scalar(2 * k - m) / Scalar(m)));
  return out;
}

namespace detail {

inline long double binomial_ld(long n, long k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  long double c = 1;
  for (long i = 1; i <= k; ++i) c = c * (long double)(n - k + i) / (long double)i;
  return std::round(c);
}

inline std::uint64_t binomial(long n, long k) { return std::uint64_t(binomial_ld(n, k)); }

// k-subset of {0..n-1} with lexicographic rank `rank`.
inline std::vector<long> unrank_combination(long n, long k, std::uint64_t rank) {
  std::vector<long> out;
  long next = 0;
  for (long slot = 0; slot < k; ++slot) {
    for (long v = next;; ++v) {
      const std::uint64_t block = binomial(n - v - 1, k - slot - 1);
      if (rank < block) {
        out.push_back(v);
        next = v + 1;
        break;
      }
      rank -= block;
    }
  }
  return out;
}

inline bool next_combination(std::vector<long>& c, long n) {
  const long k = long(c.size());
  for (long i = k - 1; i >= 0; --i) {
    if (c[std::size_t(i)] < n - k + i) {
      ++c[std::size_t(i)];
      for (long j = i + 1; j < k; ++j) c[std::size_t(j)] = c[std::size_t(j - 1)] + 1;
      return true;
    }
  }
  return false;
}

// Pool of indices to choose from and how each choice expands to positions.
template <typename Scalar>
struct SubsetSpace {
  std::vector<Scalar> pool;  // candidates, or positive candidates when pruned
  long choose = 0;
  bool mirrored = false;
  bool with_center = false;
  long double count = 0;

  std::vector<Scalar> expand(const std::vector<long>& pick) const {
    std::vector<Scalar> x;
    for (long i : pick) {
      x.push_back(pool[std::size_t(i)]);
      if (mirrored) x.push_back(-pool[std::size_t(i)]);
    }
    if (with_center) x.push_back(Scalar(0));
    std::sort(x.begin(), x.end());
    return x;
  }
};

template <typename Scalar>
SubsetSpace<Scalar> subset_space(long n, Scalar half_aperture, Scalar pitch, bool prune) {
  const auto cand = candidate_locations(half_aperture, pitch);
  SubsetSpace<Scalar> s;
  if (!prune) {
    s.pool = cand;
    s.choose = n;
  } else {
    const long m = long(cand.size()) - 1;
    for (long k = 0; k <= m; ++k)
      if (2 * k > m) s.pool.push_back(cand[std::size_t(k)]);
    s.mirrored = true;
    s.choose = n / 2;
    s.with_center = n % 2 == 1;
    if (s.with_center && m % 2 != 0) {
      s.count = 0;  // no candidate at the origin
      return s;
    }
  }
  s.count = binomial_ld(long(s.pool.size()), s.choose);
  return s;
}

template <typename Scalar>
struct SubsetBest {
  bool valid = false;
  Scalar value = 0;
  std::vector<Scalar> positions;
  SourcePosition<Scalar> source{Scalar(0), Scalar(1)};
  std::size_t evaluated = 0;
  std::uint64_t degenerate = 0;

  // Smaller value wins; ties go to the lexicographically smaller position vector.
  bool beats(const SubsetBest& o) const {
    if (!valid) return false;
    if (!o.valid) return true;
    if (value != o.value) return value < o.value;
    return positions < o.positions;
  }

  static SubsetBest merge(const SubsetBest& a, const SubsetBest& b) {
    SubsetBest out = b.beats(a) ? b : a;
    out.degenerate = a.degenerate + b.degenerate;
    return out;
  }
};

}  // namespace detail

/// Number of subsets the exhaustive search would enumerate.
template <typename Scalar>
long double exhaustive_subset_count(long n, Scalar half_aperture, Scalar pitch, bool symmetry_prune) {
  return detail::subset_space(n, half_aperture, pitch, symmetry_prune).count;
}

/// Brute-force minimiser of the worst-case SPEB over N-subsets of the
/// candidate grid. Aborts with SearchSpaceTooLarge instead of sampling when
/// subsets x grid points exceeds the budget.
template <typename Scalar>
ExhaustiveResult<Scalar> exhaustive_search(long n, Scalar half_aperture, Scalar wavelength,
                                           const SensingParams<Scalar>& params, const RegionGrid<Scalar>& grid,
                                           const ExhaustiveOptions<Scalar>& opts) {
  if (params.antennas != n) fail(ErrorCode::InvalidArgument, "sensing parameters were built for a different antenna count");
  if (n < 3) fail(ErrorCode::InvalidArgument, "exhaustive search needs at least three antennas");
  if (opts.pitch < wavelength / 2 * (1 - Scalar(1e-12)))
    fail(ErrorCode::SpacingViolation, "candidate pitch is below lambda/2");
  const Scalar kap = kappa(params);
  const auto space = detail::subset_space(n, half_aperture, opts.pitch, opts.symmetry_prune);
  if (space.count < 1)
    fail(ErrorCode::InfeasibleAperture, "no admissible " + std::to_string(n) + "-antenna subset of the candidates");
  const long double work = space.count * (long double)grid.size();
  if (work > (long double)opts.budget)
    fail(ErrorCode::SearchSpaceTooLarge, std::to_string((unsigned long long)space.count) + " subsets x " +
                                             std::to_string(grid.size()) + " grid points exceeds the budget of " +
                                             std::to_string((unsigned long long)opts.budget));
  const std::uint64_t total = std::uint64_t(space.count);
  const long pool = long(space.pool.size());

  auto map_range = [&](std::size_t begin, std::size_t end) {
    detail::SubsetBest<Scalar> best;
    std::vector<long> pick = detail::unrank_combination(pool, space.choose, begin);
    for (std::size_t i = begin; i < end; ++i) {
      if (i > begin) detail::next_combination(pick, pool);
      detail::SubsetBest<Scalar> c;
      c.positions = space.expand(pick);
      try {
        const ArrayGeometry<Scalar> array(c.positions, half_aperture, wavelength);
        const detail::ArraySpeb<Scalar> ev(sample_moments(array), half_aperture, kap);
        const auto m = detail::grid_max_range(grid, [&](Scalar u, Scalar r) { return ev.speb(u, r); }, 0,
                                              grid.size());
        if (!m.valid) throw Error(ErrorCode::AllPointsDegenerate, "");
        c.valid = true;
        c.value = m.value;
        c.source = SourcePosition<Scalar>(m.u, m.r);
        c.evaluated = m.evaluated;
      } catch (const Error&) {
        c.degenerate = 1;
      }
      best = detail::SubsetBest<Scalar>::merge(best, c);
    }
    return best;
  };
  const auto best = parallel_map_reduce(
      std::size_t(total), detail::SubsetBest<Scalar>{}, map_range,
      [](const auto& a, const auto& b) { return detail::SubsetBest<Scalar>::merge(a, b); }, opts.threads);
  if (!best.valid) fail(ErrorCode::AllPointsDegenerate, "every candidate subset is degenerate");

  ArrayGeometry<Scalar> geometry(best.positions, half_aperture, wavelength);
  DesignReport<Scalar> report{"exhaustive", best.value, best.source, grid.size(), best.evaluated,
                              grid.n_u(), grid.n_r()};
  return {std::move(geometry), std::move(report), total, best.degenerate};
}

using RegionGridd = RegionGrid<double>;
using DesignReportd = DesignReport<double>;

}  // namespace maplace
