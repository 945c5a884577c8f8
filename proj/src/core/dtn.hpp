#pragma once

#include <cstdint>

#include "core/grids.hpp"

namespace dbar {

// Dense Dirichlet-to-Neumann matrix over N_b equispaced boundary nodes of the
// unit circle, acting on nodal trace values (row = output node).
struct BoundaryOperator {
  std::vector<cplx> matrix;  // n_b x n_b, row-major
  int n_b = 0;
  double E = 0.0;

  cplx& at(int i, int j) { return matrix[static_cast<std::size_t>(i) * n_b + j]; }
  const cplx& at(int i, int j) const { return matrix[static_cast<std::size_t>(i) * n_b + j]; }

  // apply to a nodal trace vector
  std::vector<cplx> apply(const std::vector<cplx>& f) const;
};

// Interior solve: second-order finite differences on a Cartesian grid with
// Shortley-Weller correction at the disc boundary; Dirichlet data entered per
// discrete Fourier boundary mode; normal derivative by a third-order one-sided
// radial formula with local quadratic least-squares sampling of the solution.
// n_fd is the resolution of the dedicated interior grid.
BoundaryOperator assemble_dtn(const PotentialField& v, const EnergyContext& E, int n_b,
                              int n_fd = 256);

enum class PerturbMode { random_uniform, rank_one, second_potential };

struct PerturbResult {
  BoundaryOperator op;
  double measured_delta = 0.0;
};

// Norm-controlled perturbation. For random_uniform / rank_one the
// perturbation is rescaled after measurement so the new operator sits at
// opnorm distance delta_target from the input (exact up to re-measurement).
// For second_potential the caller supplies the second assembled operator and
// delta is measured, not prescribed.
PerturbResult perturb_dtn(const BoundaryOperator& phi, double delta_target, PerturbMode mode,
                          std::uint64_t seed, const BoundaryOperator* phi2 = nullptr);

// Discrete L-infinity -> L-infinity operator norm of a nodal trace matrix:
// max over rows of the absolute row sum (equals the sup over +-1 boundary
// vectors of the output sup-norm).
double opnorm_linf(const BoundaryOperator& delta_op);
double opnorm_linf_diff(const BoundaryOperator& a, const BoundaryOperator& b);

// Fourier-basis representation F^{-1} Phi F for the diagonalization tests.
std::vector<cplx> dtn_fourier_matrix(const BoundaryOperator& op);

}  // namespace dbar
