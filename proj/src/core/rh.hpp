#pragma once

#include <map>
#include <string>

#include "core/cauchy.hpp"
#include "core/scattering.hpp"

namespace dbar {

// Shared, z-independent state for a reconstruction run: the embedding grid,
// the envelope r(lambda) resampled onto it, and the per-node phase
// frequencies. The oscillatory z-phases are applied analytically per node, so
// only the smooth envelope is ever interpolated.
struct RhContext {
  EnergyContext E;
  SpectralGrid sgrid;
  CartesianEmbed embed;
  std::vector<cplx> rho;       // n_circle x n_circle, row-major (a, b)
  std::vector<cplx> r_embed;   // r(lambda) at embedding nodes
  std::vector<cplx> phase_vec; // a_t with r_z = r * exp(-i Re(z conj(a_t)))
  std::vector<std::uint32_t> active;  // nodes with non-negligible |r|
  bool has_jump = false;       // rho not identically zero
  int n_circle = 0;

  RhContext(const ScatteringData& scat, int conv_n);
};

// RH workspace at one spatial point z: the d-bar datum, the solved fields,
// and the named residuals. X/Omega fields per circle anchor are only
// materialized by the per-anchor diagnostic solver (solve_X); the pipeline
// carries their circle-integrated aggregates P and Q instead, which evaluate
// the same formulas after exchanging the zeta integral with the solves.
struct RHWorkspace {
  cplx z = 0.0;
  std::vector<cplx> r_z;     // on the embedding grid
  std::vector<cplx> e;       // on the embedding grid
  std::vector<cplx> K;       // on circle nodes (empty when no jump datum)
  std::vector<cplx> K_hat;   // Fourier coefficients of K
  std::vector<cplx> P_corr;  // P - (Cauchy integral of K), embedding grid
  std::vector<cplx> Q;       // embedding grid
  cplx mu_minus1 = 0.0;
  std::map<std::string, double> residuals;
};

// r(zeta, z) samples: annulus surface per the operation contract
ComplexField build_r_z(const ScatteringData& scat, const SpectralGrid& sgrid, cplx z);
// embedding-grid variant used by the solvers
std::vector<cplx> build_r_z_embed(const RhContext& ctx, cplx z);

// e = 1 + dbar^{-1}[r_z conj(e)] by fixed-point iteration with a measured
// sup residual; fails with no-convergence outside the contraction regime.
struct EResult {
  std::vector<cplx> e;
  double residual = 0.0;
  int iterations = 0;
};
EResult solve_e(const RhContext& ctx, const std::vector<cplx>& r_z);

// per-anchor singular solve X = pole + dbar^{-1}[r_z conj(X)], pole
// 1/(2(zeta-lambda)) or 1/(2i(zeta-lambda)); diagnostic-grade
enum class XKind { X1, X2 };
struct XResult {
  std::vector<cplx> X;  // embedding grid
  double residual = 0.0;
};
XResult solve_X(const RhContext& ctx, const std::vector<cplx>& r_z, cplx zeta, XKind kind);

// circle-aggregated fields for a given ring function K:
//   P = C_K - dbar^{-1}[r conj(Q)],  Q = -dbar^{-1}[r conj(P)]
// where C_K is the off-circle Cauchy integral of K.
struct PQResult {
  std::vector<cplx> P_corr;  // P - C_K
  std::vector<cplx> Q;
  std::vector<cplx> trace_W; // (P - Q) at the outer offset ring nodes
  int iterations = 0;
};
PQResult solve_pq(const RhContext& ctx, const std::vector<cplx>& r_z,
                  const CauchyBoundary& cb);

struct KResult {
  std::vector<cplx> K;
  double residual = 0.0;
  PQResult pq;       // fields at the final K
  int defect_rounds = 0;
};
KResult solve_K(const RhContext& ctx, const std::vector<cplx>& r_z,
                const std::vector<cplx>& e, cplx z);

// full per-z solve
RHWorkspace solve_workspace(const RhContext& ctx, cplx z);

// the large-lambda coefficient: volumetric r e-bar term plus the K-weighted
// circle terms with the omega moments folded through P and Q
cplx mu_minus1_at(const RhContext& ctx, const RHWorkspace& ws);

// mu(lambda) assembled from the workspace; direct quadrature evaluation at
// arbitrary lambda (used by the d-bar and jump residual oracles)
cplx assemble_mu(const RhContext& ctx, const RHWorkspace& ws, cplx lambda);

// z-derivative of mu_minus1 via the displayed A + B + C integrals, with the
// z-derivative fields obtained from neighboring-z workspaces and the omega
// moments from adjoint solves of the same discrete system
struct AbcResult {
  cplx A = 0.0, B = 0.0, C = 0.0;
  cplx dz_mu = 0.0;
};
AbcResult dz_mu_minus1_abc(const RhContext& ctx, cplx z);

// per-anchor omega moments (diagnostic route; cross-checks the adjoint route)
struct OmegaMoments {
  cplx M1 = 0.0, M2 = 0.0;  // (1/pi) int r conj(Omega_k(., zeta)) dA
};
OmegaMoments omega_moments_direct(const RhContext& ctx, const std::vector<cplx>& r_z, cplx zeta);
// adjoint-route moments for all circle anchors at once
void omega_moments_adjoint(const RhContext& ctx, const std::vector<cplx>& weight_field,
                           const std::vector<cplx>& r_z_op, std::vector<cplx>& M1,
                           std::vector<cplx>& M2);

enum class Route { spectral_dz, abc_formula };

struct ReconstructionResult {
  std::vector<cplx> v_rec;       // spatial grid
  std::vector<cplx> mu_minus1;   // spatial grid
  Route route = Route::spectral_dz;
  double error_vs_truth = -1.0;  // relative sup over D; negative when no truth
  double im_sup = 0.0;           // sup |Im v_rec| (reported for real inputs)
  std::map<std::string, double> residual_maxima;
};

struct ReconstructOptions {
  int conv_n = 256;
  const PotentialField* truth = nullptr;
};

ReconstructionResult reconstruct_v(const ScatteringData& scat, const SpatialGrid& grid,
                                   Route route, const ReconstructOptions& opts = {});

}  // namespace dbar
