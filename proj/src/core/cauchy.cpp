#include "core/cauchy.hpp"

#include <algorithm>
#include <cmath>

#include "core/fft.hpp"
#include "core/special.hpp"

namespace dbar {

namespace {
inline int signed_offset(int d, int two_n) { return d <= two_n / 2 ? d : d - two_n; }
}  // namespace

CartesianEmbed::CartesianEmbed(int n, double extent) : n_(n), extent_(extent) {
  if (n < 16 || n % 2 != 0) fail_invalid("embedding grid needs even n >= 16");
  if (extent <= 0) fail_invalid("embedding grid extent must be positive");
  h_ = 2.0 * extent / n;
  id_ = register_grid(GridKind::cartesian_embed, size());

  const int two_n = 2 * n;
  std::vector<cplx> ker(static_cast<std::size_t>(two_n) * two_n);
  for (int dj = 0; dj < two_n; ++dj) {
    double y = h_ * signed_offset(dj, two_n);
    for (int di = 0; di < two_n; ++di) {
      double x = h_ * signed_offset(di, two_n);
      ker[static_cast<std::size_t>(dj) * two_n + di] = special::cauchy_kernel_cell({x, y}, h_);
    }
  }
  fft::forward2d(ker, two_n, two_n);
  kernel_hat_ = std::move(ker);
}

std::vector<cplx> dbar_inverse(const CartesianEmbed& grid, const std::vector<cplx>& f) {
  const int n = grid.n();
  const int two_n = 2 * n;
  std::vector<cplx> pad(static_cast<std::size_t>(two_n) * two_n, 0.0);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      pad[static_cast<std::size_t>(j) * two_n + i] = f[grid.idx(i, j)];
  fft::forward2d(pad, two_n, two_n);
  const auto& khat = grid.kernel_hat();
  for (std::size_t t = 0; t < pad.size(); ++t) pad[t] *= khat[t];
  fft::inverse2d(pad, two_n, two_n);
  const double scale = grid.cell() / (static_cast<double>(two_n) * two_n);
  std::vector<cplx> out(grid.size());
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      out[grid.idx(i, j)] = pad[static_cast<std::size_t>(j) * two_n + i] * scale;
  return out;
}

std::vector<cplx> annulus_to_embed(const ComplexField& f, const SpectralGrid& sgrid,
                                   const CartesianEmbed& grid) {
  if (f.values.size() != sgrid.annulus_size()) fail_invalid("annulus field size mismatch");
  const int nr = sgrid.n_radii(), nt = sgrid.n_theta();
  const double dlog = sgrid.dlog();
  const double logmin = std::log(sgrid.radii().front());
  std::vector<cplx> out(grid.size(), 0.0);
  for (int j = 0; j < grid.n(); ++j)
    for (int i = 0; i < grid.n(); ++i) {
      cplx lam = grid.node(i, j);
      double r = std::abs(lam);
      if (r < sgrid.radii().front() || r > sgrid.radii().back()) continue;
      double tr = (std::log(r) - logmin) / dlog;
      double tt = std::atan2(lam.imag(), lam.real()) / (2.0 * kPi / nt);
      if (tt < 0) tt += nt;
      int ir0 = std::clamp(static_cast<int>(std::floor(tr)), 0, nr - 2);
      int it0 = static_cast<int>(std::floor(tt)) % nt;
      double ar = tr - ir0, at = tt - std::floor(tt);
      int it1 = (it0 + 1) % nt;
      out[grid.idx(i, j)] =
          (1 - ar) * (1 - at) * f.values[sgrid.annulus_idx(ir0, it0)] +
          (1 - ar) * at * f.values[sgrid.annulus_idx(ir0, it1)] +
          ar * (1 - at) * f.values[sgrid.annulus_idx(ir0 + 1, it0)] +
          ar * at * f.values[sgrid.annulus_idx(ir0 + 1, it1)];
    }
  return out;
}

cplx embed_interp(const std::vector<cplx>& u, const CartesianEmbed& grid, cplx lambda) {
  const int n = grid.n();
  double fx = (lambda.real() + grid.extent()) / grid.h() - 0.5;
  double fy = (lambda.imag() + grid.extent()) / grid.h() - 0.5;
  int i0 = static_cast<int>(std::floor(fx));
  int j0 = static_cast<int>(std::floor(fy));
  double tx = fx - i0, ty = fy - j0;
  auto at = [&](int i, int j) -> cplx {
    i = std::clamp(i, 0, n - 1);
    j = std::clamp(j, 0, n - 1);
    return u[grid.idx(i, j)];
  };
  return (1 - tx) * (1 - ty) * at(i0, j0) + tx * (1 - ty) * at(i0 + 1, j0) +
         (1 - tx) * ty * at(i0, j0 + 1) + tx * ty * at(i0 + 1, j0 + 1);
}

ComplexField embed_to_annulus(const std::vector<cplx>& u, const CartesianEmbed& grid,
                              const SpectralGrid& sgrid) {
  ComplexField out;
  out.grid_id = sgrid.id();
  out.values.resize(sgrid.annulus_size());
  for (int ir = 0; ir < sgrid.n_radii(); ++ir)
    for (int jt = 0; jt < sgrid.n_theta(); ++jt)
      out.values[sgrid.annulus_idx(ir, jt)] = embed_interp(u, grid, sgrid.node(ir, jt));
  return out;
}

namespace {
void check_tail(const ComplexField& f, const SpectralGrid& sgrid) {
  // mass fraction carried by the outermost ring
  double total = 0.0, rim = 0.0;
  for (int ir = 0; ir < sgrid.n_radii(); ++ir) {
    double w = sgrid.area_weight(ir);
    for (int jt = 0; jt < sgrid.n_theta(); ++jt) {
      double a = std::abs(f.values[sgrid.annulus_idx(ir, jt)]) * w;
      total += a;
      if (ir == sgrid.n_radii() - 1) rim += a;
    }
  }
  if (total > 0 && rim > 1e-6 * total)
    throw Error(ErrCode::invalid_argument, "tail-too-heavy: field mass reaches lambda_max rim");
}
}  // namespace

ComplexField cauchy_solid(const ComplexField& f, const SpectralGrid& sgrid,
                          const CartesianEmbed& grid) {
  check_tail(f, sgrid);
  std::vector<cplx> fc = annulus_to_embed(f, sgrid, grid);
  std::vector<cplx> u = dbar_inverse(grid, fc);
  return embed_to_annulus(u, grid, sgrid);
}

ComplexField cauchy_solid_anchored(const ComplexField& f, const SpectralGrid& sgrid,
                                   const CartesianEmbed& grid, cplx zeta) {
  check_tail(f, sgrid);
  ComplexField g;
  g.grid_id = f.grid_id;
  g.values.resize(f.values.size());
  for (int ir = 0; ir < sgrid.n_radii(); ++ir)
    for (int jt = 0; jt < sgrid.n_theta(); ++jt) {
      std::size_t t = sgrid.annulus_idx(ir, jt);
      g.values[t] = f.values[t] / (zeta - sgrid.node(ir, jt));
    }
  std::vector<cplx> gc = annulus_to_embed(g, sgrid, grid);
  std::vector<cplx> u = dbar_inverse(grid, gc);
  ComplexField out;
  out.grid_id = sgrid.id();
  out.values.resize(sgrid.annulus_size());
  for (int ir = 0; ir < sgrid.n_radii(); ++ir)
    for (int jt = 0; jt < sgrid.n_theta(); ++jt) {
      cplx lam = sgrid.node(ir, jt);
      out.values[sgrid.annulus_idx(ir, jt)] = (zeta - lam) * embed_interp(u, grid, lam);
    }
  return out;
}

CauchyBoundary::CauchyBoundary(const std::vector<cplx>& u_on_ring) {
  coeff_ = u_on_ring;
  int n = static_cast<int>(coeff_.size());
  if (n < 4) fail_invalid("cauchy_boundary needs at least 4 ring nodes");
  fft::forward1d(coeff_.data(), n);
  for (cplx& c : coeff_) c /= static_cast<double>(n);
}

cplx CauchyBoundary::eval_plus(cplx lambda) const {
  // analytic part: sum_{s >= 0} u_s lambda^s, Horner from the top
  int n = static_cast<int>(coeff_.size());
  int top = n / 2 - 1;
  cplx acc = 0.0;
  for (int s = top; s >= 0; --s) acc = acc * lambda + coeff_[s];
  return acc;
}

cplx CauchyBoundary::eval_minus(cplx lambda) const {
  // co-analytic part: -sum_{s < 0} u_s lambda^s  (series in 1/lambda)
  int n = static_cast<int>(coeff_.size());
  cplx inv = 1.0 / lambda;
  cplx acc = 0.0;
  for (int s = n / 2; s >= 1; --s) acc = acc * inv + coeff_[n - s];
  return -(acc * inv);
}

cplx CauchyBoundary::plus(cplx lambda_on_T) const { return eval_plus(lambda_on_T); }
cplx CauchyBoundary::minus(cplx lambda_on_T) const { return eval_minus(lambda_on_T); }

cplx CauchyBoundary::off_circle(cplx lambda) const {
  double r = std::abs(lambda);
  if (std::abs(r - 1.0) < 1e-14)
    fail_invalid("off_circle evaluation requested on the circle");
  return r < 1.0 ? eval_plus(lambda) : eval_minus(lambda);
}

}  // namespace dbar
