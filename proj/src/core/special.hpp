#pragma once

#include <vector>

#include "core/common.hpp"

namespace dbar {
namespace special {

// Outgoing-normalized 2-D Helmholtz kernel with the sign convention
// (Laplacian + E) G = +delta, i.e. G(x) = -(i/4) H0^(1)(sqrt(E)|x|).
cplx helmholtz_outgoing(double wavenumber, double r);

// Cell average of helmholtz_outgoing over a square cell of side h centered at
// the origin (equivalent-radius disc closed form; the log singularity is
// integrable).
cplx helmholtz_cell_average(double wavenumber, double h);

// Integral of exp(i k (x cos phi + y sin phi)) d phi over [phi_a, phi_b],
// composite Gauss-Legendre with node count adapted to the phase magnitude.
cplx plane_wave_arc(double wavenumber, double x, double y, double phi_a, double phi_b);

// Cell average of 1/(pi * eta) over the square cell of side h centered at
// eta0; the cell containing the origin averages to zero by symmetry. Near
// cells use tensor Gauss-Legendre, far cells the midpoint value (the
// integrand is harmonic so the midpoint is already h^4-accurate).
cplx cauchy_kernel_cell(cplx eta0, double h);

// Nodes/weights of the n-point Gauss-Legendre rule on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace special
}  // namespace dbar
