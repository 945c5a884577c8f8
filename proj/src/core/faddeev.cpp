#include "core/faddeev.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/fft.hpp"
#include "core/gmres.hpp"
#include "core/special.hpp"

namespace dbar {

Momentum lambda_to_k(cplx lambda, const EnergyContext& E) {
  if (lambda == cplx(0.0)) throw Error(ErrCode::invalid_argument, "zero-lambda");
  cplx inv = 1.0 / lambda;
  Momentum k;
  k.k1 = (lambda + inv) * (E.sqrtE / 2.0);
  k.k2 = (inv - lambda) * (kI * E.sqrtE / 2.0);
  return k;
}

namespace {

constexpr double kArcSwitch = 0.35;  // |Im k| below this uses the directional kernel

// wrap displacement index to signed offset: d in [0, 2n) -> d or d - 2n
inline int signed_offset(int d, int two_n) { return d <= two_n / 2 ? d : d - two_n; }

void build_lattice_kernel(FaddeevKernel& ker, const SpatialGrid& grid) {
  const int n = grid.n();
  const int two_n = 2 * n;
  const double L = grid.L();
  const double kappa = ker.k.im_norm();
  const double dxi_base = kPi / (2.0 * L);

  int M = 1;
  while (M < 8 && 2.5 * dxi_base / M > kappa) M *= 2;
  ker.oversample = M;

  const int nn = 2 * n * M;  // lattice points per axis
  const double dxi = 2.0 * kPi / (nn * grid.h());

  std::vector<cplx> lat(static_cast<std::size_t>(nn) * nn);
  const cplx two_k1 = 2.0 * ker.k.k1, two_k2 = 2.0 * ker.k.k2;
  for (int b = 0; b < nn; ++b) {
    double xi2 = dxi * (b - nn / 2 + 0.5);
    for (int a = 0; a < nn; ++a) {
      double xi1 = dxi * (a - nn / 2 + 0.5);
      cplx denom = xi1 * xi1 + xi2 * xi2 + two_k1 * xi1 + two_k2 * xi2;
      if (std::abs(denom) < 1e-13)
        throw Error(ErrCode::solver, "singular-denominator in lattice Fourier sum");
      lat[static_cast<std::size_t>(b) * nn + a] = -1.0 / denom;
    }
  }
  fft::inverse2d(lat, nn, nn);  // unnormalized sum with e^{+i 2pi j m / nn}

  // Phase fixups from the half-integer shift and the m-index recentering.
  // The factor (-1)^d e^{i pi d/nn} is not nn-periodic, so it is evaluated at
  // the signed displacement while the FFT output is read modulo nn.
  const double scale = dxi * dxi / (4.0 * kPi * kPi);
  auto axis_phase = [nn](int d_signed) {
    double ph = kPi * d_signed / nn - kPi * d_signed;
    return std::polar(1.0, ph);
  };

  ker.g_wrap.assign(static_cast<std::size_t>(two_n) * two_n, 0.0);
  for (int dj = 0; dj < two_n; ++dj) {
    int sj = signed_offset(dj, two_n);
    int j = (sj % nn + nn) % nn;
    cplx pj = axis_phase(sj);
    for (int di = 0; di < two_n; ++di) {
      int si = signed_offset(di, two_n);
      int i = (si % nn + nn) % nn;
      ker.g_wrap[static_cast<std::size_t>(dj) * two_n + di] =
          scale * axis_phase(si) * pj * lat[static_cast<std::size_t>(j) * nn + i];
    }
  }
}

void build_arc_kernel(FaddeevKernel& ker, const SpatialGrid& grid, const double* gamma) {
  const int n = grid.n();
  const int two_n = 2 * n;
  const double h = grid.h();
  const auto kre = ker.k.re();
  const auto kim = ker.k.im();
  const double kappa = ker.k.im_norm();

  double g1, g2;
  if (kappa > 0) {
    g1 = kim[0] / kappa;
    g2 = kim[1] / kappa;
  } else if (gamma) {
    g1 = gamma[0];
    g2 = gamma[1];
  } else {
    throw Error(ErrCode::invalid_argument,
                "faddeev_green: real k requires an approach direction");
  }

  const double kr = std::hypot(kre[0], kre[1]);
  if (kr <= 0) throw Error(ErrCode::invalid_argument, "faddeev_green: |Re k| = 0");

  // arc {phi : gamma . eta(phi) > gamma . k_R} on |eta| = kr
  const double c0 = std::clamp((g1 * kre[0] + g2 * kre[1]) / kr, -1.0, 1.0);
  const double half_width = std::acos(c0);
  const double phi_gamma = std::atan2(g2, g1);

  const cplx coef{0.0, 1.0 / (4.0 * kPi)};
  // center cell: both kernel pieces averaged over the same equivalent-radius
  // disc, so the J0 parts cancel exactly as they do pointwise
  cplx center = special::helmholtz_cell_average(kr, h);
  if (half_width > 0) {
    double a = h / std::sqrt(kPi);
    double disc_avg = 2.0 * std::cyl_bessel_j(1, kr * a) / (kr * a);
    center += coef * (2.0 * half_width) * disc_avg;
  }

  ker.g_wrap.assign(static_cast<std::size_t>(two_n) * two_n, 0.0);
  for (int dj = 0; dj < two_n; ++dj) {
    double y = h * signed_offset(dj, two_n);
    for (int di = 0; di < two_n; ++di) {
      double x = h * signed_offset(di, two_n);
      double r = std::hypot(x, y);
      cplx bracket;
      if (r < 0.5 * h) {
        bracket = center;
      } else {
        bracket = special::helmholtz_outgoing(kr, r);
        if (half_width > 0)
          bracket += coef * special::plane_wave_arc(kr, x, y, phi_gamma - half_width,
                                                    phi_gamma + half_width);
      }
      cplx phase = std::exp(-kI * (ker.k.k1 * x + ker.k.k2 * y));
      ker.g_wrap[static_cast<std::size_t>(dj) * two_n + di] = phase * bracket;
    }
  }
}

}  // namespace

FaddeevKernel faddeev_green(const Momentum& k, const SpatialGrid& grid, double E,
                            const double* gamma) {
  FaddeevKernel ker;
  ker.k = k;
  ker.E = E;
  ker.n = grid.n();
  ker.L = grid.L();
  ker.arc_branch = k.im_norm() < kArcSwitch;
  if (ker.arc_branch)
    build_arc_kernel(ker, grid, gamma);
  else
    build_lattice_kernel(ker, grid);

  for (const cplx& g : ker.g_wrap)
    if (!std::isfinite(g.real()) || !std::isfinite(g.imag()))
      throw Error(ErrCode::solver, "faddeev_green: non-finite kernel sample");

  ker.g_hat = ker.g_wrap;
  fft::forward2d(ker.g_hat, 2 * ker.n, 2 * ker.n);
  return ker;
}

std::vector<cplx> apply_green(const FaddeevKernel& kernel, const SpatialGrid& grid,
                              const std::vector<cplx>& w) {
  const int n = grid.n();
  const int two_n = 2 * n;
  std::vector<cplx> pad(static_cast<std::size_t>(two_n) * two_n, 0.0);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      pad[static_cast<std::size_t>(j) * two_n + i] = w[grid.idx(i, j)];
  fft::forward2d(pad, two_n, two_n);
  for (std::size_t t = 0; t < pad.size(); ++t) pad[t] *= kernel.g_hat[t];
  fft::inverse2d(pad, two_n, two_n);
  const double scale = grid.cell() / (static_cast<double>(two_n) * two_n);
  std::vector<cplx> out(grid.size());
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      out[grid.idx(i, j)] = pad[static_cast<std::size_t>(j) * two_n + i] * scale;
  return out;
}

MuSolution solve_mu_k(const PotentialField& v, const SpatialGrid& grid, const Momentum& k,
                      const EnergyContext& E, const double* gamma,
                      const FaddeevKernel* prebuilt) {
  MuSolution sol;
  sol.k = k;
  if (v.is_zero()) {
    sol.mu.assign(grid.size(), 1.0);
    sol.residual = 0.0;
    sol.condition_estimate = 1.0;
    return sol;
  }

  FaddeevKernel local;
  const FaddeevKernel* ker = prebuilt;
  if (!ker) {
    local = faddeev_green(k, grid, E.E, gamma);
    ker = &local;
  }

  const std::size_t N = grid.size();
  using Vec = Eigen::VectorXcd;
  Vec b = Vec::Ones(static_cast<Eigen::Index>(N));
  Vec x = b;

  std::vector<cplx> work(N);
  auto apply = [&](const Vec& in, Vec& out) {
    for (std::size_t t = 0; t < N; ++t) work[t] = v.values[t] * in[static_cast<Eigen::Index>(t)];
    std::vector<cplx> conv = apply_green(*ker, grid, work);
    out.resize(static_cast<Eigen::Index>(N));
    for (std::size_t t = 0; t < N; ++t)
      out[static_cast<Eigen::Index>(t)] = in[static_cast<Eigen::Index>(t)] - conv[t];
  };

  GmresReport rep = gmres<cplx>(apply, b, x, 30, 1e-10, 500);
  sol.condition_estimate = std::max(1.0, rep.condition);
  sol.iterations = rep.iterations;
  if (!rep.converged)
    throw Error(ErrCode::solver, "no-convergence: Lippmann-Schwinger iteration stagnated");

  sol.mu.assign(N, 0.0);
  for (std::size_t t = 0; t < N; ++t) sol.mu[t] = x[static_cast<Eigen::Index>(t)];

  // measured sup residual, re-evaluated with the final iterate
  for (std::size_t t = 0; t < N; ++t) work[t] = v.values[t] * sol.mu[t];
  std::vector<cplx> conv = apply_green(*ker, grid, work);
  double res = 0.0;
  for (std::size_t t = 0; t < N; ++t)
    res = std::max(res, std::abs(sol.mu[t] - 1.0 - conv[t]));
  sol.residual = res;
  return sol;
}

MuSolution solve_mu(const PotentialField& v, const SpatialGrid& grid, cplx lambda,
                    const EnergyContext& E) {
  Momentum k = lambda_to_k(lambda, E);
  cplx ksq = k.k1 * k.k1 + k.k2 * k.k2;
  if (std::abs(ksq - E.E) > 1e-9 * (1.0 + E.E))
    throw Error(ErrCode::solver, "faddeev kernel momentum off the energy variety");
  MuSolution sol = solve_mu_k(v, grid, k, E);
  sol.lambda = lambda;
  return sol;
}

MuSolution mu_pm(const PotentialField& v, const SpatialGrid& grid, cplx lambda_on_T, Side side,
                 const EnergyContext& E, double offset_h) {
  if (std::abs(std::abs(lambda_on_T) - 1.0) > 1e-12)
    fail_invalid("mu_pm requires |lambda| = 1");
  double factor = side == Side::plus ? 1.0 - offset_h : 1.0 + offset_h;
  cplx lam = lambda_on_T * factor;
  MuSolution sol = solve_mu(v, grid, lam, E);
  return sol;
}

MuSolution mu_gamma(const PotentialField& v, const SpatialGrid& grid,
                    const std::array<double, 2>& k_real, const std::array<double, 2>& gamma,
                    const EnergyContext& E, double offset_h) {
  double gn = std::hypot(gamma[0], gamma[1]);
  if (std::abs(gn - 1.0) > 1e-9) fail_invalid("mu_gamma requires |gamma| = 1");
  double eps = offset_h * E.sqrtE;
  Momentum k;
  k.k1 = cplx(k_real[0], eps * gamma[0]);
  k.k2 = cplx(k_real[1], eps * gamma[1]);
  double g[2] = {gamma[0], gamma[1]};
  return solve_mu_k(v, grid, k, E, g);
}

cplx mu_interp(const std::vector<cplx>& mu, const SpatialGrid& grid, double x, double y) {
  const int n = grid.n();
  double fx = (x + grid.L()) / grid.h();
  double fy = (y + grid.L()) / grid.h();
  int i0 = static_cast<int>(std::floor(fx));
  int j0 = static_cast<int>(std::floor(fy));
  double tx = fx - i0, ty = fy - j0;
  auto at = [&](int i, int j) -> cplx {
    i = std::clamp(i, 0, n - 1);
    j = std::clamp(j, 0, n - 1);
    return mu[grid.idx(i, j)];
  };
  return (1 - tx) * (1 - ty) * at(i0, j0) + tx * (1 - ty) * at(i0 + 1, j0) +
         (1 - tx) * ty * at(i0, j0 + 1) + tx * ty * at(i0 + 1, j0 + 1);
}

cplx psi_at(const MuSolution& sol, const SpatialGrid& grid, double x, double y) {
  cplx mu = mu_interp(sol.mu, grid, x, y);
  cplx phase = std::exp(kI * (sol.k.k1 * x + sol.k.k2 * y));
  return phase * mu;
}

std::vector<ExceptionalFlag> detect_exceptional(const PotentialField& v, const SpatialGrid& grid,
                                                const EnergyContext& E,
                                                const SpectralGrid& sgrid) {
  const int nr = sgrid.n_radii(), nt = sgrid.n_theta();
  std::vector<ExceptionalFlag> all(static_cast<std::size_t>(nr) * nt);
  std::vector<std::uint8_t> flagged(all.size(), 0);
  parallel_for(all.size(), [&](std::size_t idx) {
    int ir = static_cast<int>(idx) / nt;
    int jt = static_cast<int>(idx) % nt;
    cplx lam = sgrid.node(ir, jt);
    ExceptionalFlag f{ir, jt, lam, 1.0, true};
    try {
      MuSolution sol = solve_mu(v, grid, lam, E);
      f.condition = sol.condition_estimate;
      f.converged = true;
    } catch (const Error&) {
      f.condition = std::numeric_limits<double>::infinity();
      f.converged = false;
    }
    all[idx] = f;
    flagged[idx] = (!all[idx].converged || all[idx].condition > 1e8) ? 1 : 0;
  });
  std::vector<ExceptionalFlag> out;
  for (std::size_t i = 0; i < all.size(); ++i)
    if (flagged[i]) out.push_back(all[i]);
  return out;
}

}  // namespace dbar
