#include "core/grids.hpp"

#include <atomic>
#include <cmath>
#include <map>
#include <mutex>

namespace dbar {

namespace {
std::mutex g_reg_mutex;
std::map<std::uint64_t, std::pair<GridKind, std::size_t>>& registry() {
  static std::map<std::uint64_t, std::pair<GridKind, std::size_t>> r;
  return r;
}
}  // namespace

std::uint64_t register_grid(GridKind kind, std::size_t node_count) {
  static std::atomic<std::uint64_t> next{1};
  std::uint64_t id = next.fetch_add(1);
  std::lock_guard<std::mutex> lock(g_reg_mutex);
  registry()[id] = {kind, node_count};
  return id;
}

bool grid_registered(std::uint64_t id) {
  std::lock_guard<std::mutex> lock(g_reg_mutex);
  return registry().count(id) > 0;
}

GridKind registered_kind(std::uint64_t id) {
  std::lock_guard<std::mutex> lock(g_reg_mutex);
  auto it = registry().find(id);
  if (it == registry().end()) fail_invalid("grid id not registered");
  return it->second.first;
}

SpatialGrid::SpatialGrid(int n, double L) : n_(n), L_(L), h_(2.0 * L / n) {
  if (n < 16) fail_invalid("spatial grid requires n >= 16");
  if (L <= 0) fail_invalid("spatial grid requires L > 0");
  id_ = register_grid(GridKind::spatial, size());
}

SpectralGrid::SpectralGrid(double lambda_max, int n_radii, int n_theta, int n_circle,
                           double offset_h)
    : lambda_max_(lambda_max),
      n_radii_(n_radii),
      n_theta_(n_theta),
      n_circle_(n_circle),
      offset_h_(offset_h) {
  if (lambda_max <= 1.0) fail_invalid("spectral grid requires lambda_max > 1");
  if (n_radii < 2 || n_radii % 2 != 0) fail_invalid("n_radii must be even and >= 2");
  if (n_theta < 4 || n_circle < 4) fail_invalid("spectral grid too small");
  // cell-centered in log|lambda|: radii come in exact 1/rho pairs, 1 excluded
  dlog_ = 2.0 * std::log(lambda_max) / n_radii;
  radii_.resize(n_radii);
  for (int i = 0; i < n_radii; ++i) {
    double l = (i + 0.5 - n_radii / 2.0) * dlog_;
    radii_[i] = std::exp(l);
  }
  double gap = 1.0 - radii_[n_radii / 2 - 1];
  if (!(offset_h > 0.0 && offset_h < gap))
    fail_invalid("offset_h must lie in (0, distance from 1 to nearest radius)");
  id_ = register_grid(GridKind::spectral, annulus_size());
}

cplx SpectralGrid::node(int ir, int jt) const {
  double r = radii_[ir];
  double t = theta(jt);
  return {r * std::cos(t), r * std::sin(t)};
}

cplx SpectralGrid::circle_node(int m) const {
  double t = circle_angle(m);
  return {std::cos(t), std::sin(t)};
}

cplx SpectralGrid::offset_node(int m, bool outer) const {
  double r = outer ? 1.0 + offset_h_ : 1.0 - offset_h_;
  double t = circle_angle(m);
  return {r * std::cos(t), r * std::sin(t)};
}

double SpectralGrid::area_weight(int ir) const {
  double r = radii_[ir];
  return r * r * dlog_ * (2.0 * kPi / n_theta_);
}

EnergyContext::EnergyContext(double energy) : E(energy), sqrtE(std::sqrt(energy)) {
  if (!(energy > 0.0)) fail_invalid("energy must be positive");
}

bool PotentialField::is_zero() const {
  for (double v : values)
    if (v != 0.0) return false;
  return true;
}

double PotentialField::sup_norm() const {
  double s = 0.0;
  for (double v : values) s = std::max(s, std::abs(v));
  return s;
}

void ComplexField::check_finite(const char* what) const {
  for (const cplx& v : values)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      fail_solver(std::string(what) + ": non-finite field entry");
}

double bump_profile(double s) {
  if (s >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

namespace {

void add_bump(PotentialField& f, const SpatialGrid& g, double amp, double radius, double cx,
              double cy) {
  if (radius <= 0) fail_invalid("bump radius must be positive");
  double reach = std::hypot(cx, cy) + radius;
  if (reach >= f.D_radius)
    throw Error(ErrCode::invalid_argument, "support-violates-D: bump leaks outside D");
  for (int j = 0; j < g.n(); ++j)
    for (int i = 0; i < g.n(); ++i) {
      double s = std::hypot(g.x(i) - cx, g.y(j) - cy) / radius;
      if (s < 1.0) {
        std::size_t k = g.idx(i, j);
        f.values[k] += amp * bump_profile(s);
        f.support_mask[k] = 1;
      }
    }
}

}  // namespace

PotentialField build_potential(PotentialKind kind, const std::vector<double>& params,
                               const SpatialGrid& grid, int m, double D_radius) {
  PotentialField f;
  f.n = grid.n();
  f.L = grid.L();
  f.m = m;
  f.D_radius = D_radius;
  f.grid_id = grid.id();
  f.values.assign(grid.size(), 0.0);
  f.support_mask.assign(grid.size(), 0);
  if (D_radius > grid.L()) fail_invalid("D must fit inside the grid square (l <= L)");

  switch (kind) {
    case PotentialKind::zero:
      break;
    case PotentialKind::bump: {
      double amp = params.size() > 0 ? params[0] : 1.0;
      double rad = params.size() > 1 ? params[1] : 0.5;
      double cx = params.size() > 2 ? params[2] : 0.0;
      double cy = params.size() > 3 ? params[3] : 0.0;
      add_bump(f, grid, amp, rad, cx, cy);
      break;
    }
    case PotentialKind::two_bumps: {
      if (params.size() < 2) fail_invalid("two_bumps needs at least [a1, r1]");
      double a1 = params[0], r1 = params[1];
      double cx1 = params.size() > 2 ? params[2] : 0.35;
      double cy1 = params.size() > 3 ? params[3] : 0.0;
      double a2 = params.size() > 4 ? params[4] : -a1;
      double r2 = params.size() > 5 ? params[5] : r1;
      double cx2 = params.size() > 6 ? params[6] : -cx1;
      double cy2 = params.size() > 7 ? params[7] : -cy1;
      add_bump(f, grid, a1, r1, cx1, cy1);
      add_bump(f, grid, a2, r2, cx2, cy2);
      break;
    }
    case PotentialKind::custom_samples:
      fail_invalid("custom_samples requires build_potential_from_samples");
  }
  return f;
}

PotentialField build_potential_from_samples(const std::vector<double>& samples,
                                            const SpatialGrid& grid, int m, double D_radius) {
  if (samples.size() != grid.size()) fail_invalid("custom samples size mismatch");
  PotentialField f;
  f.n = grid.n();
  f.L = grid.L();
  f.m = m;
  f.D_radius = D_radius;
  f.grid_id = grid.id();
  f.values = samples;
  f.support_mask.assign(grid.size(), 0);
  for (int j = 0; j < grid.n(); ++j)
    for (int i = 0; i < grid.n(); ++i) {
      std::size_t k = grid.idx(i, j);
      if (samples[k] != 0.0) {
        if (std::hypot(grid.x(i), grid.y(j)) >= D_radius)
          throw Error(ErrCode::invalid_argument,
                      "support-violates-D: nonzero sample outside D");
        f.support_mask[k] = 1;
      }
    }
  return f;
}

}  // namespace dbar
