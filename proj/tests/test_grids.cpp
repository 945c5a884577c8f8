#include <doctest.h>

#include <cmath>

#include "core/grids.hpp"

using namespace dbar;

TEST_CASE("spectral grid radii are symmetric under inversion and exclude 1") {
  SpectralGrid sg(8.0, 64, 64, 256, 1e-3);
  const auto& r = sg.radii();
  REQUIRE(r.size() == 64);
  for (int i = 0; i < 64; ++i) {
    CHECK(r[i] * r[sg.inverse_radius_index(i)] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r[i] != 1.0);
  }
  CHECK(r.front() > 1.0 / 8.0 - 1e-12);
  CHECK(r.back() < 8.0 + 1e-12);
  CHECK(r.front() * r.back() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("offset_h must stay below the gap to the nearest radius") {
  CHECK_THROWS_AS(SpectralGrid(8.0, 64, 64, 256, 0.5), Error);
  CHECK_THROWS_AS(SpectralGrid(8.0, 64, 64, 256, 0.0), Error);
}

TEST_CASE("zero potential build") {
  SpatialGrid g(64, 1.5);
  PotentialField v = build_potential(PotentialKind::zero, {}, g);
  CHECK(v.is_zero());
  CHECK(v.sup_norm() == 0.0);
}

TEST_CASE("bump potential peaks at the center and vanishes on the boundary of D") {
  SpatialGrid g(64, 1.5);
  PotentialField v = build_potential(PotentialKind::bump, {1.0, 0.5, 0.0, 0.0}, g);
  // max value 1 at center (center is a grid node for even n: x = 0 at i = n/2)
  std::size_t c = g.idx(32, 32);
  CHECK(v.values[c] == doctest::Approx(1.0).epsilon(1e-14));
  double outside = 0.0;
  for (int j = 0; j < g.n(); ++j)
    for (int i = 0; i < g.n(); ++i)
      if (std::hypot(g.x(i), g.y(j)) >= 0.5)
        outside = std::max(outside, std::abs(v.values[g.idx(i, j)]));
  CHECK(outside == 0.0);
  // support mask consistency
  for (std::size_t t = 0; t < v.values.size(); ++t)
    if (!v.support_mask[t]) CHECK(v.values[t] == 0.0);
}

TEST_CASE("bump leaking outside D is rejected") {
  SpatialGrid g(64, 1.5);
  CHECK_THROWS_WITH_AS(build_potential(PotentialKind::bump, {1.0, 0.6, 0.5, 0.0}, g),
                       doctest::Contains("support-violates-D"), Error);
}

TEST_CASE("two mirrored bumps with opposite amplitudes have zero mean") {
  SpatialGrid g(64, 1.5);
  PotentialField v =
      build_potential(PotentialKind::two_bumps, {1.0, 0.3, 0.35, 0.0, -1.0, 0.3, -0.35, 0.0}, g);
  // grid quadrature oracle for the mean
  double mean = 0.0;
  for (double x : v.values) mean += x;
  mean *= g.cell();
  CHECK(std::abs(mean) < 1e-12);
}

TEST_CASE("grid registry resolves ids") {
  SpatialGrid g(16, 1.0);
  CHECK(grid_registered(g.id()));
  CHECK(registered_kind(g.id()) == GridKind::spatial);
  CHECK_FALSE(grid_registered(0));
}

TEST_CASE("energy context caches the square root") {
  EnergyContext E(25.0);
  CHECK(E.sqrtE * E.sqrtE == doctest::Approx(25.0).epsilon(1e-15));
  CHECK_THROWS_AS(EnergyContext(-1.0), Error);
}
