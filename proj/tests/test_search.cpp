// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "maplace/design.hpp"
#include "maplace/search.hpp"
#include "oracles.hpp"

using namespace maplace;
using doctest::Approx;

namespace {
constexpr double kLambda = 0.01;
constexpr double kA = 25 * kLambda;

double rel(double x, double y) { return std::abs(x - y) / std::abs(y); }

bool same_report(const DesignReportd& x, const DesignReportd& y) {
  return x.worst_case_speb == y.worst_case_speb && x.worst_case_source == y.worst_case_source &&
         x.evaluated_points == y.evaluated_points;
}
}  // namespace

TEST_CASE("region grid") {
  const NearFieldRegiond region(kA, kLambda);
  const RegionGridd grid(region, 21, 15);
  CHECK(grid.size() == 21u * 15u);
  for (const auto& p : grid.points()) CHECK(region_contains(region, p));
  const SourcePositiond broadside(0.0, region.max_rayleigh());
  CHECK(std::count(grid.points().begin(), grid.points().end(), broadside) == 1);

  SUBCASE("even n_u still contains broadside") {
    const RegionGridd even(region, 10, 4);
    CHECK(std::count(even.points().begin(), even.points().end(), broadside) == 1);
    CHECK(even.size() == 11u * 4u);
  }
  SUBCASE("degenerate resolutions") {
    const RegionGridd one(region, 1, 1);
    REQUIRE(one.size() == 1);
    CHECK(one.points()[0] == broadside);
    CHECK_THROWS_AS(RegionGridd(region, 0, 5), Error);
  }
  SUBCASE("refinement nests the coarse grid exactly") {
    const auto fine = grid.refined();
    CHECK(fine.n_u() == 41);
    CHECK(fine.n_r() == 29);
    for (const auto& p : grid.points())
      CHECK(std::find(fine.points().begin(), fine.points().end(), p) != fine.points().end());
  }
  SUBCASE("angles are mirror images") {
    const auto& pts = grid.points();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto& q = pts[pts.size() - 1 - (i / 15) * 15 - (15 - 1 - i % 15)];
      CHECK(q.u() == -pts[i].u());
      CHECK(q.r() == pts[i].r());
    }
  }
  SUBCASE("custom points must lie in the region") {
    CHECK_THROWS_AS(RegionGridd(region, std::vector<SourcePositiond>{SourcePositiond(0.0, 1.0)}), Error);
  }
  SUBCASE("near-endfire angles with an empty radial interval are dropped") {
    const NearFieldRegiond small(0.6 * kLambda, kLambda, 0.999);
    const RegionGridd g(small, 201, 3);
    CHECK(g.size() < 201u * 3u);
    for (const auto& p : g.points()) CHECK(region_contains(small, p));
  }
}

TEST_CASE("worst case of the three-point design sits at broadside on the Rayleigh boundary") {
  const NearFieldRegiond region(kA, kLambda);
  const RegionGridd grid(region, 201, 201);
  const auto design = three_point_design(kA, kLambda);
  const auto report = worst_case_speb(design.moments(), 1.0, grid);
  CHECK(report.worst_case_source == SourcePositiond(0.0, region.max_rayleigh()));
  const double closed = broadside_worst_case(design.moments(), 1.0, region.max_rayleigh());
  CHECK(rel(report.worst_case_speb, closed) < 1e-6);
  CHECK(report.grid_points == grid.size());
}

TEST_CASE("symmetric arrays: maximiser at broadside on the Rayleigh boundary") {
  std::mt19937_64 rng(9);
  for (double a_over_l : {5.0, 12.0, 25.0}) {
    const double a = a_over_l * kLambda;
    const NearFieldRegiond region(a, kLambda);
    const RegionGridd grid(region, 61, 41);
    for (int i = 0; i < 5; ++i) {
      const auto dist = oracle::random_symmetric_distribution(rng, 3 + i, a);
      const ArrayGeometryd array(dist.support(), a, kLambda);
      const auto report = worst_case_speb(array, 1.0, grid);
      CHECK(report.worst_case_source.u() == 0.0);
      CHECK(report.worst_case_source.r() == region.max_rayleigh());
    }
  }
}

TEST_CASE("single-point grid returns that point's SPEB") {
  const NearFieldRegiond region(kA, kLambda);
  const SourcePositiond s(0.3, 20.0);
  const RegionGridd grid(region, std::vector<SourcePositiond>{s});
  const auto array = discrete_deployment(25, kA, kLambda);
  const auto report = worst_case_speb(array, 2.0, grid);
  CHECK(report.worst_case_speb == speb(array, 2.0, s));
  CHECK(report.worst_case_source == s);
}

TEST_CASE("ties prefer smaller |u|, then larger r, then larger u") {
  const NearFieldRegiond region(kA, kLambda);
  const MomentMatrixd m(0.03, 0.0, 0.001);
  const RegionGridd grid(region, std::vector<SourcePositiond>{SourcePositiond(-0.5, 20.0), SourcePositiond(0.5, 20.0)});
  CHECK(worst_case_speb(m, 1.0, grid).worst_case_source.u() == 0.5);

  detail::GridMax<double> a{true, 1.0, 0.2, 5.0, 1}, b{true, 1.0, -0.1, 4.0, 1}, c{true, 1.0, 0.1, 4.5, 1};
  CHECK(b.beats(a));
  CHECK(c.beats(b));
  CHECK_FALSE(a.beats(c));
}

TEST_CASE("all points failing raises AllPointsDegenerate") {
  const NearFieldRegiond region(kA, kLambda);
  const RegionGridd grid(region, 5, 5);
  try {
    detail::worst_case(grid, [](double, double) -> double { throw Error(ErrorCode::EndfireSingularity, "x"); }, 2,
                       "x");
    FAIL("expected AllPointsDegenerate");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AllPointsDegenerate);
  }
  CHECK_THROWS_AS(worst_case_speb(ArrayGeometryd(std::vector<double>{-kA, kA}, kA, kLambda), 1.0, grid), Error);
}

TEST_CASE("grid refinement never lowers the worst case") {
  std::mt19937_64 rng(4);
  const NearFieldRegiond region(kA, kLambda);
  RegionGridd grid(region, 5, 4);
  for (int level = 0; level < 4; ++level) {
    const auto fine = grid.refined();
    for (int i = 0; i < 5; ++i) {
      const auto d = oracle::random_distribution(rng, 6, kA);
      CHECK(worst_case_speb(d.moments(), 1.0, fine).worst_case_speb >=
            worst_case_speb(d.moments(), 1.0, grid).worst_case_speb);
    }
    grid = fine;
  }
}

TEST_CASE("symmetric moments: grid maximum equals the closed form") {
  std::mt19937_64 rng(606);
  const NearFieldRegiond region(kA, kLambda);
  const RegionGridd grid(region, 201, 201);
  for (int i = 0; i < 5; ++i) {
    const auto d = oracle::random_symmetric_distribution(rng, 2 + i, kA);
    const auto report = worst_case_speb(d.moments(), 1.0, grid);
    CHECK(rel(report.worst_case_speb, broadside_worst_case(d.moments(), 1.0, region.max_rayleigh())) < 1e-6);
  }
}

TEST_CASE("boundary profile") {
  const NearFieldRegiond region(kA, kLambda);
  const double d = region.max_rayleigh();
  std::mt19937_64 rng(66);
  for (int i = 0; i < 20; ++i) {
    const auto m = oracle::random_symmetric_distribution(rng, 2 + i % 4, kA).moments();
    const MomentMatrixd sym(m.var_x(), 0.0, m.var_x2());
    const double t0 = boundary_speb_profile(sym, 1.0, d, 0.0);
    const double t1 = boundary_speb_profile(sym, 1.0, d, 1.0);
    CHECK(rel(t0 - t1, 4 * d * d * (d * d / sym.var_x2() - 3 / (4 * sym.var_x()))) < 1e-12);
    CHECK(t0 > t1);
    // convex in u^2 with f'' = 8 d^4 / Var(X^2)
    const double h = 1e-2;
    for (double v = h; v < 1 - h; v += 0.1) {
      const double f0 = boundary_speb_profile(sym, 1.0, d, std::sqrt(v - h));
      const double f1 = boundary_speb_profile(sym, 1.0, d, std::sqrt(v));
      const double f2 = boundary_speb_profile(sym, 1.0, d, std::sqrt(v + h));
      CHECK(rel((f0 - 2 * f1 + f2) / (h * h), 8 * std::pow(d, 4) / sym.var_x2()) < 1e-4);
    }
    for (double u : {0.1, 0.45, 0.9}) {
      CHECK(boundary_speb_profile(sym, 1.0, d, u) == boundary_speb_profile(sym, 1.0, d, -u));
      CHECK(rel(boundary_speb_profile(sym, 1.0, d, u),
                speb_distribution(sym, 1.0, SourcePositiond(u, region.rayleigh(u)))) < 1e-12);
    }
  }
  CHECK_THROWS_AS(boundary_speb_profile(MomentMatrixd(0.03, 0.001, 0.001), 1.0, d, 0.0), Error);
}

TEST_CASE("worst case is independent of the worker count") {
  const NearFieldRegiond region(kA, kLambda);
  const RegionGridd grid(region, 101, 51);
  std::mt19937_64 rng(1);
  const auto d = oracle::random_distribution(rng, 7, kA);
  const auto ref = worst_case_speb(d.moments(), 1.0, grid, 1);
  for (unsigned t : {2u, 3u, 8u}) CHECK(same_report(worst_case_speb(d.moments(), 1.0, grid, t), ref));
}

TEST_CASE("candidate locations") {
  const auto c = candidate_locations(5 * kLambda, kLambda / 2);
  CHECK(c.size() == 21u);
  CHECK(c.front() == -5 * kLambda);
  CHECK(c.back() == 5 * kLambda);
  for (std::size_t k = 0; k < c.size(); ++k) CHECK(c[k] == -c[c.size() - 1 - k]);
  // pitch that does not divide the aperture is widened, never narrowed
  const auto w = candidate_locations(1.0, 0.3);
  CHECK(w.size() == 7u);
  CHECK(w[1] - w[0] >= 0.3);
}

TEST_CASE("combination unranking matches sequential enumeration") {
  std::vector<long> c{0, 1, 2};
  for (std::uint64_t rank = 0; rank < detail::binomial(9, 3); ++rank) {
    CHECK(detail::unrank_combination(9, 3, rank) == c);
    detail::next_combination(c, 9);
  }
  CHECK(detail::binomial(21, 5) == 20349u);
}

TEST_CASE("exhaustive search") {
  SUBCASE("three antennas on {-a, 0, a}") {
    const double a = 5 * kLambda;
    const NearFieldRegiond region(a, kLambda);
    const RegionGridd grid(region, 21, 21);
    const auto params = SensingParamsd::from_snr_db(kLambda, 1024, 5.0, 3);
    const auto res = exhaustive_search(3L, a, kLambda, params, grid, ExhaustiveOptions<double>{a, false});
    CHECK(res.geometry.positions() == Eigen::Vector3d(-a, 0.0, a));
    CHECK(res.subsets == 1u);
  }

  SUBCASE("N = 5, a = 5 lambda: within 5% of the discrete deployment") {
    const double a = 5 * kLambda;
    const NearFieldRegiond region(a, kLambda);
    const RegionGridd grid(region, 101, 101);
    const auto params = SensingParamsd::from_snr_db(kLambda, 1024, 5.0, 5);
    const auto res = exhaustive_search(5L, a, kLambda, params, grid, ExhaustiveOptions<double>{kLambda / 2});
    const auto deployed = worst_case_speb(discrete_deployment(5, a, kLambda), params, grid);
    CHECK(res.report.worst_case_speb <= deployed.worst_case_speb);
    CHECK(deployed.worst_case_speb <= 1.05 * res.report.worst_case_speb);
    CHECK(res.subsets == 45u);
    CHECK(res.geometry.first_spacing_violation(kLambda / 2) == -1);
    // the report is recomputable from the returned geometry
    const auto again = worst_case_speb(res.geometry, params, grid);
    CHECK(again.worst_case_speb == res.report.worst_case_speb);
  }

  SUBCASE("reflection of the optimum has the same value") {
    const double a = 3 * kLambda;
    const NearFieldRegiond region(a, kLambda);
    const RegionGridd grid(region, 41, 41);
    const auto params = SensingParamsd::from_snr_db(kLambda, 1024, 5.0, 5);
    const auto full = exhaustive_search(5L, a, kLambda, params, grid, ExhaustiveOptions<double>{kLambda / 2, false});
    const ArrayGeometryd mirrored(VectorX<double>(-full.geometry.positions().reverse()), a, kLambda);
    CHECK(worst_case_speb(mirrored, params, grid).worst_case_speb == full.report.worst_case_speb);
    const auto& p = full.geometry.positions();
    const auto& m = mirrored.positions();
    CHECK_FALSE(std::lexicographical_compare(m.begin(), m.end(), p.begin(), p.end()));
  }

  SUBCASE("deterministic across worker counts") {
    const double a = 3 * kLambda;
    const NearFieldRegiond region(a, kLambda);
    const RegionGridd grid(region, 21, 21);
    const auto params = SensingParamsd::from_snr_db(kLambda, 1024, 5.0, 5);
    ExhaustiveOptions<double> opts{kLambda / 2, false};
    opts.threads = 1;
    const auto one = exhaustive_search(5L, a, kLambda, params, grid, opts);
    for (unsigned t : {2u, 5u}) {
      opts.threads = t;
      const auto many = exhaustive_search(5L, a, kLambda, params, grid, opts);
      CHECK(many.geometry.positions() == one.geometry.positions());
      CHECK(same_report(many.report, one.report));
    }
  }

  SUBCASE("errors") {
    const double a = 5 * kLambda;
    const NearFieldRegiond region(a, kLambda);
    const RegionGridd grid(region, 201, 201);
    const auto params = SensingParamsd::from_snr_db(kLambda, 1024, 5.0, 8);
    try {
      exhaustive_search(8L, a, kLambda, params, grid, ExhaustiveOptions<double>{kLambda / 2, false});
      FAIL("expected SearchSpaceTooLarge");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::SearchSpaceTooLarge);
    }
    CHECK_THROWS_AS(exhaustive_search(8L, a, kLambda, params, grid, ExhaustiveOptions<double>{kLambda / 4}), Error);
    const auto p30 = SensingParamsd::from_snr_db(kLambda, 1024, 5.0, 30);
    CHECK_THROWS_AS(exhaustive_search(30L, a, kLambda, p30, grid, ExhaustiveOptions<double>{kLambda / 2, false}), Error);
    CHECK(exhaustive_subset_count(5L, a, kLambda / 2, true) == 45.0L);
  }
}

TEST_CASE("exhaustive search: symmetry pruning does not change the optimum") {
  const double a = 3 * kLambda;
  const NearFieldRegiond region(a, kLambda);
  const RegionGridd grid(region, 41, 41);
  const auto params = SensingParamsd::from_snr_db(kLambda, 1024, 5.0, 4);
  const auto pruned = exhaustive_search(4L, a, kLambda, params, grid, ExhaustiveOptions<double>{kLambda / 2, true});
  const auto full = exhaustive_search(4L, a, kLambda, params, grid, ExhaustiveOptions<double>{kLambda / 2, false});
  CHECK(full.subsets == detail::binomial(13, 4));
  CHECK(full.report.worst_case_speb <= pruned.report.worst_case_speb);
  CHECK(pruned.report.worst_case_speb <= full.report.worst_case_speb);
}
