#pragma once

#include "core/grids.hpp"

namespace dbar {

// max over multi-indices |J| <= m of the grid L1 norm of the order-4 centered
// finite-difference derivative d^J v.
double sobolev_norm_m1(const PotentialField& v, int m);

// Weighted Hoelder norm ||(1+|p|^2)^{m/2} vhat(p)||_alpha of the discrete
// Fourier transform vhat(p) = (2pi)^{-2} sum e^{ip x} v(x) h^2. The sup runs
// over the discrete Fourier lattice; the Hoelder quotient is sampled on 8
// shift directions with |xi| in {1/4, 1/2, 1} at the dominant lattice points.
double weighted_fourier_norm(const PotentialField& v, int m, double alpha);

// Fourier transform of the potential at an arbitrary frequency (used by the
// norm above and by the Born-regime test oracles).
cplx potential_fourier(const PotentialField& v, double px, double py);

// L^p_nu norm of a field sampled on the (1/lambda)-symmetric annulus grid:
// ||f||_{L^p(|l|<=1)} + |||l|^{-nu} f(1/|l|)||_{L^p(|l|<=1)} by polar
// quadrature. The disc |lambda| < lambda_min is not covered by the grid; its
// contribution is dropped (decaying integrands make it negligible).
double lp_nu_norm(const ComplexField& f, const SpectralGrid& grid, double p, double nu);

}  // namespace dbar
