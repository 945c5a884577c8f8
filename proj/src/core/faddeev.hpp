#pragma once

#include <array>
#include <memory>

#include "core/grids.hpp"

namespace dbar {

// Complex momentum on (or near) the fixed-energy variety k1^2 + k2^2 = E.
struct Momentum {
  cplx k1, k2;
  std::array<double, 2> re() const { return {k1.real(), k2.real()}; }
  std::array<double, 2> im() const { return {k1.imag(), k2.imag()}; }
  double im_norm() const { return std::hypot(k1.imag(), k2.imag()); }
};

// k1 = (lambda + 1/lambda) sqrt(E)/2, k2 = (1/lambda - lambda) i sqrt(E)/2.
Momentum lambda_to_k(cplx lambda, const EnergyContext& E);

// Faddeev Green's function g(x,k), sampled on the doubled (2n x 2n) grid in
// wraparound order, together with its FFT ready for convolution.
//
// Two constructions, switched on |Im k|:
//  * lattice branch: half-integer-shifted lattice Fourier sum of
//    -1/(xi^2 + 2 k xi), oversampled in xi until the shifted lattice resolves
//    the imaginary part of the symbol along its zero variety;
//  * directional branch (|Im k| below the lattice's resolving power): the
//    one-sided limit kernel  g = e^{-ikx} [ -(i/4) H0^(1)(|Re k| |x|) + arc ],
//    where the arc term integrates plane waves over the half of the circle
//    |eta| = |Re k| selected by the approach direction. The exact complex
//    phase keeps the residual defect of this model at O(|Im k|^2).
struct FaddeevKernel {
  Momentum k;
  double E = 0.0;
  int n = 0;
  double L = 0.0;
  bool arc_branch = false;
  int oversample = 1;
  std::vector<cplx> g_wrap;  // 2n x 2n samples, wraparound displacement order
  std::vector<cplx> g_hat;   // forward FFT of g_wrap
};

// gamma: approach direction for the directional branch. If null and Im k != 0
// the direction is Im k / |Im k|; a real k with null gamma is an error.
FaddeevKernel faddeev_green(const Momentum& k, const SpatialGrid& grid, double E,
                            const double* gamma = nullptr);

// convolution  (g * w)(x) h^2  restricted to the n x n grid, w supported there
std::vector<cplx> apply_green(const FaddeevKernel& kernel, const SpatialGrid& grid,
                              const std::vector<cplx>& w);

struct MuSolution {
  std::vector<cplx> mu;     // on the spatial grid
  cplx lambda = 0.0;        // spectral parameter (0 when solved from raw k)
  Momentum k;
  double residual = 0.0;    // ||mu - 1 - g*(v mu)||_inf as measured
  double condition_estimate = 1.0;
  int iterations = 0;
};

// Lippmann-Schwinger solve mu = 1 + g*(v mu) by restarted GMRES with FFT
// convolution. Zero potential short-circuits to mu = 1 exactly.
MuSolution solve_mu(const PotentialField& v, const SpatialGrid& grid, cplx lambda,
                    const EnergyContext& E);
MuSolution solve_mu_k(const PotentialField& v, const SpatialGrid& grid, const Momentum& k,
                      const EnergyContext& E, const double* gamma = nullptr,
                      const FaddeevKernel* prebuilt = nullptr);

// one-sided circle limits: plus -> lambda (1 - h), minus -> lambda (1 + h)
MuSolution mu_pm(const PotentialField& v, const SpatialGrid& grid, cplx lambda_on_T, Side side,
                 const EnergyContext& E, double offset_h);

// directional limit at real momentum: k + i eps gamma, eps = offset_h sqrt(E)
MuSolution mu_gamma(const PotentialField& v, const SpatialGrid& grid,
                    const std::array<double, 2>& k_real, const std::array<double, 2>& gamma,
                    const EnergyContext& E, double offset_h);

// psi = e^{ikx} mu evaluated by bilinear interpolation at an arbitrary point
cplx psi_at(const MuSolution& sol, const SpatialGrid& grid, double x, double y);
cplx mu_interp(const std::vector<cplx>& mu, const SpatialGrid& grid, double x, double y);

struct ExceptionalFlag {
  int ir, jt;
  cplx lambda;
  double condition;
  bool converged;
};

// sweep of the annulus; flags nodes with condition estimate > 1e8 or failed
// convergence (failures are data, not errors)
std::vector<ExceptionalFlag> detect_exceptional(const PotentialField& v, const SpatialGrid& grid,
                                                const EnergyContext& E,
                                                const SpectralGrid& sgrid);

}  // namespace dbar
