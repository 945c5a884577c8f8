#pragma once

#include <cstdint>
#include <vector>

#include "core/common.hpp"

namespace dbar {

// ---------------------------------------------------------------------------
// Grid registry: every grid instance gets a process-unique id so fields can
// assert they are being combined on the grid they were sampled on.
// ---------------------------------------------------------------------------
enum class GridKind { spatial, spectral, cartesian_embed, boundary };

std::uint64_t register_grid(GridKind kind, std::size_t node_count);
bool grid_registered(std::uint64_t id);
GridKind registered_kind(std::uint64_t id);

// ---------------------------------------------------------------------------
// Uniform n-by-n spatial grid on the square [-L, L)^2, periodic convention
// (node x_i = -L + i*h). The physical domain D is the unit disc.
// ---------------------------------------------------------------------------
class SpatialGrid {
 public:
  SpatialGrid(int n, double L);

  int n() const { return n_; }
  double L() const { return L_; }
  double h() const { return h_; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_; }
  std::uint64_t id() const { return id_; }

  double x(int i) const { return -L_ + h_ * i; }
  double y(int j) const { return -L_ + h_ * j; }
  cplx z(int i, int j) const { return {x(i), y(j)}; }
  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(j) * n_ + i; }

  // quadrature weight of one cell
  double cell() const { return h_ * h_; }

 private:
  int n_;
  double L_;
  double h_;
  std::uint64_t id_;
};

// ---------------------------------------------------------------------------
// Spectral lambda-plane grid: a polar annulus with radii geometric and
// symmetric under lambda -> 1/lambda (1 itself excluded), a unit-circle node
// ring of size n_circle, and paired offset rings at radii 1 -+ offset_h used
// for the one-sided limits.
// ---------------------------------------------------------------------------
class SpectralGrid {
 public:
  SpectralGrid(double lambda_max, int n_radii, int n_theta, int n_circle, double offset_h);

  double lambda_min() const { return 1.0 / lambda_max_; }
  double lambda_max() const { return lambda_max_; }
  int n_radii() const { return n_radii_; }
  int n_theta() const { return n_theta_; }
  int n_circle() const { return n_circle_; }
  double offset_h() const { return offset_h_; }
  std::uint64_t id() const { return id_; }

  const std::vector<double>& radii() const { return radii_; }
  double theta(int j) const { return 2.0 * kPi * j / n_theta_; }
  double circle_angle(int m) const { return 2.0 * kPi * m / n_circle_; }
  cplx node(int ir, int jt) const;
  cplx circle_node(int m) const;
  cplx offset_node(int m, bool outer) const;  // circle angle m at radius 1 +- offset_h

  std::size_t annulus_size() const { return static_cast<std::size_t>(n_radii_) * n_theta_; }
  std::size_t annulus_idx(int ir, int jt) const {
    return static_cast<std::size_t>(ir) * n_theta_ + jt;
  }

  // area weight of annulus node (ir, jt): r^2 * dlog(r) * dtheta
  double area_weight(int ir) const;
  double dlog() const { return dlog_; }

  // index of the radius 1/rho_i (exact by construction)
  int inverse_radius_index(int ir) const { return n_radii_ - 1 - ir; }

  // arc-length weight on the circle ring
  double circle_weight() const { return 2.0 * kPi / n_circle_; }

 private:
  double lambda_max_;
  int n_radii_, n_theta_, n_circle_;
  double offset_h_;
  double dlog_;
  std::vector<double> radii_;
  std::uint64_t id_;
};

struct EnergyContext {
  double E = 0.0;
  double sqrtE = 0.0;
  explicit EnergyContext(double energy);
};

// ---------------------------------------------------------------------------
// Fields
// ---------------------------------------------------------------------------
struct PotentialField {
  std::vector<double> values;      // n*n, row-major (y slow)
  std::vector<std::uint8_t> support_mask;
  int m = 3;                       // smoothness tag
  double D_radius = 1.0;           // supp v inside |x| <= D_radius
  int n = 0;
  double L = 0.0;
  std::uint64_t grid_id = 0;

  bool is_zero() const;
  double sup_norm() const;
};

struct ComplexField {
  std::vector<cplx> values;
  std::uint64_t grid_id = 0;

  void check_finite(const char* what) const;
};

enum class PotentialKind { zero, bump, two_bumps, custom_samples };

// params:
//   zero:          []
//   bump:          [amplitude, radius, cx, cy]      (radius > 0)
//   two_bumps:     [a1, r1, cx1, cy1, a2, r2, cx2, cy2]
//   custom_samples: samples supplied separately
PotentialField build_potential(PotentialKind kind, const std::vector<double>& params,
                               const SpatialGrid& grid, int m = 3, double D_radius = 1.0);

PotentialField build_potential_from_samples(const std::vector<double>& samples,
                                            const SpatialGrid& grid, int m = 3,
                                            double D_radius = 1.0);

// C-infinity cutoff bump profile: amplitude * exp(1 - 1/(1 - s^2)) for s < 1.
double bump_profile(double s);

}  // namespace dbar
