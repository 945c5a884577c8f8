#pragma once

#include "core/grids.hpp"

namespace dbar {

// ---------------------------------------------------------------------------
// Cartesian embedding grid for the lambda plane. Spectral-plane fields that
// enter d-bar solves live here; the solid Cauchy transform is a convolution
// with 1/(pi lambda) evaluated by FFT on the padded grid. Nodes are
// cell-centered so no node sits at the origin or exactly on the unit circle.
// ---------------------------------------------------------------------------
class CartesianEmbed {
 public:
  CartesianEmbed(int n, double extent);  // grid on [-extent, extent)^2

  int n() const { return n_; }
  double extent() const { return extent_; }
  double h() const { return h_; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_; }
  std::uint64_t id() const { return id_; }

  double coord(int i) const { return -extent_ + h_ * (i + 0.5); }
  cplx node(int i, int j) const { return {coord(i), coord(j)}; }
  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(j) * n_ + i; }
  double cell() const { return h_ * h_; }

  // FFT of the cell-integrated 1/(pi lambda) kernel on the doubled grid
  const std::vector<cplx>& kernel_hat() const { return kernel_hat_; }

 private:
  int n_;
  double extent_, h_;
  std::uint64_t id_;
  std::vector<cplx> kernel_hat_;
};

// dbar^{-1} f (lambda) = -(1/pi) int f(eta)/(eta - lambda) dA(eta), sampled
// input and output on the embedding grid.
std::vector<cplx> dbar_inverse(const CartesianEmbed& grid, const std::vector<cplx>& f);

// Annulus-sampled interface per the operation contract: resamples the polar
// field onto the embedding grid (bilinear in (log r, theta)), convolves, and
// samples back at the annulus nodes. Fails with tail-too-heavy when the mass
// beyond lambda_max exceeds the stated fraction.
ComplexField cauchy_solid(const ComplexField& f, const SpectralGrid& sgrid,
                          const CartesianEmbed& grid);

// anchored variant: -(zeta - lambda)/pi int f(eta)/((eta-lambda)(zeta-eta)) dA
ComplexField cauchy_solid_anchored(const ComplexField& f, const SpectralGrid& sgrid,
                                   const CartesianEmbed& grid, cplx zeta);

// polar -> cartesian and cartesian -> polar resampling helpers
std::vector<cplx> annulus_to_embed(const ComplexField& f, const SpectralGrid& sgrid,
                                   const CartesianEmbed& grid);
ComplexField embed_to_annulus(const std::vector<cplx>& u, const CartesianEmbed& grid,
                              const SpectralGrid& sgrid);
cplx embed_interp(const std::vector<cplx>& u, const CartesianEmbed& grid, cplx lambda);

// ---------------------------------------------------------------------------
// Circle Cauchy integral (2 pi i)^{-1} oint u(zeta)/(zeta - lambda) d zeta
// for u sampled on the N_T-node ring. Evaluated through the Fourier
// coefficients of u (the trapezoid sum closed in exact arithmetic): the plus
// side sums the analytic half of the series, the minus side the co-analytic
// half, so the Plemelj jump is exact for band-limited u. The side argument
// selects the branch on the circle itself; points off the circle use |lambda|.
// ---------------------------------------------------------------------------
class CauchyBoundary {
 public:
  explicit CauchyBoundary(const std::vector<cplx>& u_on_ring);

  cplx plus(cplx lambda_on_T) const;   // limit from |lambda| < 1
  cplx minus(cplx lambda_on_T) const;  // limit from |lambda| > 1
  cplx off_circle(cplx lambda) const;  // |lambda| != 1

  int n() const { return static_cast<int>(coeff_.size()); }
  const std::vector<cplx>& coeffs() const { return coeff_; }

 private:
  std::vector<cplx> coeff_;  // Fourier coefficients, index s in [-n/2, n/2)
  cplx eval_plus(cplx lambda) const;
  cplx eval_minus(cplx lambda) const;
};

}  // namespace dbar
