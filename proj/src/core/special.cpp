#include "core/special.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace dbar {
namespace special {

cplx helmholtz_outgoing(double wavenumber, double r) {
  double s = wavenumber * r;
  double j0 = std::cyl_bessel_j(0, s);
  double y0 = std::cyl_neumann(0, s);
  // -(i/4) H0^(1)(s) = -(i/4)(J0 + i Y0) = Y0/4 - i J0/4
  return {0.25 * y0, -0.25 * j0};
}

cplx helmholtz_cell_average(double wavenumber, double h) {
  // equivalent-radius disc: same area as the cell
  double a = h / std::sqrt(kPi);
  double c = wavenumber;
  double s = c * a;
  // int_0^a H0^(1)(c r) r dr = (a/c) H1^(1)(c a) + 2i/(pi c^2)
  cplx h1{std::cyl_bessel_j(1, s), std::cyl_neumann(1, s)};
  cplx integral = (a / c) * h1 + cplx{0.0, 2.0 / (kPi * c * c)};
  cplx avg_h0 = 2.0 * kPi * integral / (h * h);
  return cplx{0.0, -0.25} * avg_h0;
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  static std::mutex mtx;
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
  {
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) {
      nodes = it->second.first;
      weights = it->second.second;
      return;
    }
  }
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Newton on Legendre polynomials from the Chebyshev initial guess
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    double dp = n * (x * p1 - p0) / (x * x - 1.0);
    nodes[i] = x;
    weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  std::lock_guard<std::mutex> lock(mtx);
  cache[n] = {nodes, weights};
}

cplx plane_wave_arc(double wavenumber, double x, double y, double phi_a, double phi_b) {
  if (phi_b <= phi_a) return 0.0;
  double s = wavenumber * std::hypot(x, y);
  int n = std::max(32, static_cast<int>(std::ceil(2.0 * s + 20)));
  n = std::min(n, 640);
  std::vector<double> gl_x, gl_w;
  gauss_legendre(n, gl_x, gl_w);
  double mid = 0.5 * (phi_a + phi_b), half = 0.5 * (phi_b - phi_a);
  cplx acc = 0.0;
  for (int i = 0; i < n; ++i) {
    double phi = mid + half * gl_x[i];
    double phase = wavenumber * (x * std::cos(phi) + y * std::sin(phi));
    acc += gl_w[i] * cplx{std::cos(phase), std::sin(phase)};
  }
  return acc * half;
}

cplx cauchy_kernel_cell(cplx eta0, double h) {
  double d = std::abs(eta0);
  if (d < 0.25 * h) return 0.0;  // origin cell: principal value vanishes by symmetry
  if (d > 6.0 * h) return 1.0 / (kPi * eta0);
  static std::vector<double> xs, ws;
  static std::once_flag once;
  std::call_once(once, [] { gauss_legendre(12, xs, ws); });
  cplx acc = 0.0;
  for (std::size_t a = 0; a < xs.size(); ++a)
    for (std::size_t b = 0; b < xs.size(); ++b) {
      cplx eta = eta0 + 0.5 * h * cplx{xs[a], xs[b]};
      acc += ws[a] * ws[b] / eta;
    }
  return acc * (0.25 / kPi);  // (h/2)^2 jacobian over h^2 cell, divided by pi
}

}  // namespace special
}  // namespace dbar
