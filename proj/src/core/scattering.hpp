#pragma once

#include "core/dtn.hpp"
#include "core/faddeev.hpp"
#include "core/grids.hpp"

namespace dbar {

enum class TorusKind { f, h_plus, h_minus, h1, h2, rho };

// kernel on the torus T_N x T_N; values[a * n + b] = K(lambda_a, lambda'_b)
struct TorusKernel {
  std::vector<cplx> values;
  int n = 0;
  TorusKind kind = TorusKind::f;

  cplx& at(int a, int b) { return values[static_cast<std::size_t>(a) * n + b]; }
  const cplx& at(int a, int b) const { return values[static_cast<std::size_t>(a) * n + b]; }
  double sup() const;
};

struct ScatteringData {
  std::vector<cplx> r_values;    // per annulus node
  std::vector<cplx> rho_values;  // n_circle x n_circle
  double E = 0.0;
  double lambda_max = 0.0;
  int n_radii = 0, n_theta = 0, n_circle = 0;
  double offset_h = 0.0;
  bool rho_decay_ok = false;     // build-time torus decay check
  double rho_consistency = 0.0;  // relative gap between the two rho routes

  // optional extras for diagnostics and the perturbation identities
  TorusKernel f, h_plus, h_minus, h1, h2;
  bool has_kernels = false;
  int n_b = 0;
  // psi boundary traces per annulus node (row-major node x boundary)
  std::vector<cplx> psi_traces;
  // phi^+ boundary traces per circle node
  std::vector<cplx> phi_traces;
  bool has_traces = false;
};

// generalized scattering amplitude at lambda for a solved mu field
cplx compute_b_with_mu(const PotentialField& v, const SpatialGrid& grid,
                       const std::vector<cplx>& mu, cplx lambda, const EnergyContext& E);
cplx compute_b(const PotentialField& v, const SpatialGrid& grid, cplx lambda,
               const EnergyContext& E);

// r(lambda) = (pi / conj(lambda)) sgn(|lambda|^2 - 1) b; exactly 0 on |l| = 1
cplx r_of_lambda(cplx b_value, cplx lambda);

// unimodular z-phase of the d-bar datum
cplx r_of_z_lambda(cplx r_value, cplx z, cplx lambda, const EnergyContext& E);

// rho(lambda, lambda', z) phase factor
cplx rho_of_z(cplx rho_value, cplx lambda, cplx lambda_prime, cplx z, const EnergyContext& E);

// torus amplitudes (direct volumetric routes)
cplx compute_f(const PotentialField& v, const SpatialGrid& grid, cplx lambda, cplx lambda_prime,
               const EnergyContext& E, double offset_h);
cplx compute_h_pm(const PotentialField& v, const SpatialGrid& grid, cplx lambda,
                  cplx lambda_prime, Side side, const EnergyContext& E, double offset_h);

// second-kind torus equation h - pi i int h theta f = f solved per row
TorusKernel hpm_from_f(const TorusKernel& f, Side side, const SpectralGrid& sgrid);

// theta-masked combinations of h+-
std::pair<TorusKernel, TorusKernel> h12_from_hpm(const TorusKernel& hp, const TorusKernel& hm,
                                                 const SpectralGrid& sgrid);

struct RhoResult {
  TorusKernel rho;
  double consistency = 0.0;  // relative gap between the two defining equations
};
RhoResult solve_rho(const TorusKernel& h1, const TorusKernel& h2, const SpectralGrid& sgrid);

// boundary-integral identities for the data differences
cplx diff_b_from_dtn(const BoundaryOperator& phi1, const BoundaryOperator& phi2,
                     const std::vector<cplx>& psi1_conj_trace,
                     const std::vector<cplx>& psi2_trace);
cplx diff_f_from_dtn(const BoundaryOperator& phi1, const BoundaryOperator& phi2,
                     const std::vector<cplx>& phi1_minus_kprime_trace,
                     const std::vector<cplx>& phi2_k_trace);

struct ScatterOptions {
  bool with_traces = false;
  bool with_kernels = false;
  int n_b = 128;
};

ScatteringData build_scattering(const PotentialField& v, const SpatialGrid& grid,
                                const SpectralGrid& sgrid, const EnergyContext& E,
                                const ScatterOptions& opts = {});

// boundary trace of psi = e^{ikx} mu at the N_b equispaced circle nodes
std::vector<cplx> psi_boundary_trace(const MuSolution& sol, const SpatialGrid& grid, int n_b);

// real momentum at a unit-circle node: k = sqrt(E) (cos phi, sin phi)
std::array<double, 2> circle_momentum(cplx lambda_on_T, const EnergyContext& E);

}  // namespace dbar
