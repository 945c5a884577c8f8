#include <doctest.h>

#include <cmath>

#include "core/norms.hpp"

using namespace dbar;

namespace {

// independent high-resolution radial quadrature of the bump L1 mass
double bump_mass_oracle(double amplitude, double radius) {
  const int N = 200000;
  double acc = 0.0;
  for (int i = 0; i < N; ++i) {
    double r = (i + 0.5) / N * radius;
    acc += bump_profile(r / radius) * r;
  }
  return std::abs(amplitude) * 2.0 * kPi * acc * (radius / N);
}

}  // namespace

TEST_CASE("sobolev_norm_m1 zero case") {
  SpatialGrid g(64, 1.5);
  PotentialField v = build_potential(PotentialKind::zero, {}, g);
  for (int m = 0; m <= 3; ++m) CHECK(sobolev_norm_m1(v, m) == 0.0);
}

TEST_CASE("sobolev_norm_m1 m=0 equals the L1 mass of the bump within 1%") {
  SpatialGrid g(64, 1.5);
  double amp = 0.7, rad = 0.5;
  PotentialField v = build_potential(PotentialKind::bump, {amp, rad, 0.0, 0.0}, g);
  double oracle = bump_mass_oracle(amp, rad);
  double got = sobolev_norm_m1(v, 0);
  CHECK(got == doctest::Approx(oracle).epsilon(0.01));
}

TEST_CASE("sobolev_norm_m1 homogeneity and monotonicity in m") {
  SpatialGrid g(64, 1.5);
  PotentialField v = build_potential(PotentialKind::bump, {1.0, 0.5}, g);
  PotentialField v2 = v;
  for (double& x : v2.values) x *= 2.0;
  for (int m = 0; m <= 3; ++m) {
    double n1 = sobolev_norm_m1(v, m);
    double n2 = sobolev_norm_m1(v2, m);
    CHECK(n2 == doctest::Approx(2.0 * n1).epsilon(1e-12));
    if (m > 0) CHECK(sobolev_norm_m1(v, m) >= sobolev_norm_m1(v, m - 1));
  }
}

TEST_CASE("weighted_fourier_norm zero case and monotone weight") {
  SpatialGrid g(64, 1.5);
  PotentialField z = build_potential(PotentialKind::zero, {}, g);
  CHECK(weighted_fourier_norm(z, 3, 0.5) == 0.0);

  PotentialField v = build_potential(PotentialKind::bump, {1.0, 0.5}, g);
  double n2 = weighted_fourier_norm(v, 2, 0.5);
  double n3 = weighted_fourier_norm(v, 3, 0.5);
  double n4 = weighted_fourier_norm(v, 4, 0.5);
  CHECK(n3 > n2);
  CHECK(n4 > n3);
  // dominates the plain Fourier sup
  double sup_hat = 0.0;
  for (int kx = -16; kx <= 16; ++kx)
    for (int ky = -16; ky <= 16; ++ky)
      sup_hat = std::max(sup_hat, std::abs(potential_fourier(v, kx * kPi / 1.5, ky * kPi / 1.5)));
  CHECK(n3 >= sup_hat);
}

TEST_CASE("weighted_fourier_norm stable under grid refinement") {
  SpatialGrid g64(64, 1.5), g128(128, 1.5);
  PotentialField v64 = build_potential(PotentialKind::bump, {1.0, 0.5}, g64);
  PotentialField v128 = build_potential(PotentialKind::bump, {1.0, 0.5}, g128);
  double a = weighted_fourier_norm(v64, 3, 0.5);
  double b = weighted_fourier_norm(v128, 3, 0.5);
  CHECK(a == doctest::Approx(b).epsilon(0.05));
}

TEST_CASE("lp_nu_norm zero and constant cases") {
  SpectralGrid sg(8.0, 64, 64, 256, 1e-3);
  ComplexField f;
  f.grid_id = sg.id();
  f.values.assign(sg.annulus_size(), 0.0);
  CHECK(lp_nu_norm(f, sg, 2.0, 0.0) == 0.0);

  for (auto& x : f.values) x = 1.0;
  // two unit-disc L2 norms of 1; the uncovered core |lambda| < 1/8 accounts
  // for the small deficit
  double got = lp_nu_norm(f, sg, 2.0, 0.0);
  CHECK(got == doctest::Approx(2.0 * std::sqrt(kPi)).epsilon(0.02));
}

TEST_CASE("lp_nu_norm homogeneity") {
  SpectralGrid sg(8.0, 32, 32, 64, 1e-3);
  ComplexField f;
  f.grid_id = sg.id();
  f.values.resize(sg.annulus_size());
  for (int ir = 0; ir < sg.n_radii(); ++ir)
    for (int jt = 0; jt < sg.n_theta(); ++jt) {
      cplx lam = sg.node(ir, jt);
      f.values[sg.annulus_idx(ir, jt)] = std::exp(-std::norm(lam)) * (1.0 + lam);
    }
  ComplexField f3 = f;
  for (auto& x : f3.values) x *= cplx(0.0, -3.0);
  double n1 = lp_nu_norm(f, sg, 3.0, 1.0);
  double n3 = lp_nu_norm(f3, sg, 3.0, 1.0);
  CHECK(n3 == doctest::Approx(3.0 * n1).epsilon(1e-12));
}
