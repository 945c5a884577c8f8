#include "core/rh.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "core/fft.hpp"
#include "core/gmres.hpp"

namespace dbar {

namespace {

constexpr double kFixedPointTol = 1e-11;
constexpr int kFixedPointMax = 300;

// thread-local padded scratch keeps the per-z convolution allocation-free
std::vector<cplx>& tl_pad(std::size_t n) {
  thread_local std::vector<cplx> buf;
  if (buf.size() != n) buf.assign(n, 0.0);
  return buf;
}

void dbar_inverse_inplace(const CartesianEmbed& grid, const std::vector<cplx>& f,
                          std::vector<cplx>& out) {
  const int n = grid.n();
  const int two_n = 2 * n;
  auto& pad = tl_pad(static_cast<std::size_t>(two_n) * two_n);
  std::fill(pad.begin(), pad.end(), cplx(0.0));
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      pad[static_cast<std::size_t>(j) * two_n + i] = f[grid.idx(i, j)];
  fft::forward2d(pad.data(), two_n, two_n);
  const auto& khat = grid.kernel_hat();
  for (std::size_t t = 0; t < pad.size(); ++t) pad[t] *= khat[t];
  fft::inverse2d(pad.data(), two_n, two_n);
  const double scale = grid.cell() / (static_cast<double>(two_n) * two_n);
  out.resize(grid.size());
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      out[grid.idx(i, j)] = pad[static_cast<std::size_t>(j) * two_n + i] * scale;
}

double sup_abs(const std::vector<cplx>& v) {
  double s = 0.0;
  for (const cplx& x : v) s = std::max(s, std::abs(x));
  return s;
}

}  // namespace

RhContext::RhContext(const ScatteringData& scat, int conv_n)
    : E(scat.E),
      sgrid(scat.lambda_max, scat.n_radii, scat.n_theta, scat.n_circle, scat.offset_h),
      embed(conv_n, scat.lambda_max),
      rho(scat.rho_values),
      n_circle(scat.n_circle) {
  ComplexField rf;
  rf.grid_id = sgrid.id();
  rf.values = scat.r_values;
  r_embed = annulus_to_embed(rf, sgrid, embed);

  phase_vec.resize(embed.size());
  for (int j = 0; j < embed.n(); ++j)
    for (int i = 0; i < embed.n(); ++i) {
      cplx lam = embed.node(i, j);
      phase_vec[embed.idx(i, j)] = E.sqrtE * (1.0 + 1.0 / std::norm(lam)) * lam;
    }

  double rmax = sup_abs(r_embed);
  for (std::size_t t = 0; t < r_embed.size(); ++t)
    if (std::abs(r_embed[t]) > 1e-14 * rmax && rmax > 0) active.push_back(static_cast<std::uint32_t>(t));

  for (const cplx& v : rho)
    if (v != cplx(0.0)) {
      has_jump = true;
      break;
    }
}

ComplexField build_r_z(const ScatteringData& scat, const SpectralGrid& sgrid, cplx z) {
  ComplexField out;
  out.grid_id = sgrid.id();
  out.values.resize(sgrid.annulus_size());
  EnergyContext E(scat.E);
  for (int ir = 0; ir < sgrid.n_radii(); ++ir)
    for (int jt = 0; jt < sgrid.n_theta(); ++jt) {
      std::size_t t = sgrid.annulus_idx(ir, jt);
      out.values[t] = r_of_z_lambda(scat.r_values[t], z, sgrid.node(ir, jt), E);
    }
  return out;
}

std::vector<cplx> build_r_z_embed(const RhContext& ctx, cplx z) {
  std::vector<cplx> out(ctx.embed.size(), 0.0);
  for (std::uint32_t t : ctx.active) {
    double ph = -(z * std::conj(ctx.phase_vec[t])).real();
    out[t] = ctx.r_embed[t] * std::polar(1.0, ph);
  }
  return out;
}

EResult solve_e(const RhContext& ctx, const std::vector<cplx>& r_z) {
  EResult res;
  const std::size_t N = ctx.embed.size();
  res.e.assign(N, 1.0);
  if (ctx.active.empty()) return res;

  std::vector<cplx> prod(N, 0.0), conv;
  double prev_delta = std::numeric_limits<double>::max();
  for (int it = 0; it < kFixedPointMax; ++it) {
    for (std::uint32_t t : ctx.active) prod[t] = r_z[t] * std::conj(res.e[t]);
    dbar_inverse_inplace(ctx.embed, prod, conv);
    double delta = 0.0;
    for (std::size_t t = 0; t < N; ++t) {
      cplx next = 1.0 + conv[t];
      delta = std::max(delta, std::abs(next - res.e[t]));
      res.e[t] = next;
    }
    res.iterations = it + 1;
    if (delta <= kFixedPointTol) break;
    if (it > 50 && delta > 0.9 * prev_delta)
      throw Error(ErrCode::solver, "no-convergence: e-equation outside contraction regime");
    prev_delta = delta;
    if (it == kFixedPointMax - 1)
      throw Error(ErrCode::solver, "no-convergence: e-equation iteration cap reached");
  }
  // measured residual
  for (std::uint32_t t : ctx.active) prod[t] = r_z[t] * std::conj(res.e[t]);
  dbar_inverse_inplace(ctx.embed, prod, conv);
  double r = 0.0;
  for (std::size_t t = 0; t < N; ++t) r = std::max(r, std::abs(res.e[t] - 1.0 - conv[t]));
  res.residual = r;
  return res;
}

XResult solve_X(const RhContext& ctx, const std::vector<cplx>& r_z, cplx zeta, XKind kind) {
  const std::size_t N = ctx.embed.size();
  const cplx ck = kind == XKind::X1 ? cplx(0.5, 0.0) : cplx(0.0, -0.5);  // 1/2 or 1/(2i)
  std::vector<cplx> rhs(N);
  for (std::size_t t = 0; t < N; ++t) {
    cplx lam = ctx.embed.node(static_cast<int>(t) % ctx.embed.n(),
                              static_cast<int>(t) / ctx.embed.n());
    rhs[t] = ck / (zeta - lam);
  }
  XResult res;
  res.X = rhs;
  if (ctx.active.empty()) return res;

  std::vector<cplx> prod(N, 0.0), conv;
  for (int it = 0; it < kFixedPointMax; ++it) {
    for (std::uint32_t t : ctx.active) prod[t] = r_z[t] * std::conj(res.X[t]);
    dbar_inverse_inplace(ctx.embed, prod, conv);
    double delta = 0.0;
    for (std::size_t t = 0; t < N; ++t) {
      cplx next = rhs[t] + conv[t];
      delta = std::max(delta, std::abs(next - res.X[t]));
      res.X[t] = next;
    }
    if (delta <= kFixedPointTol) break;
    if (it == kFixedPointMax - 1)
      throw Error(ErrCode::solver, "no-convergence: X-equation iteration cap reached");
  }
  for (std::uint32_t t : ctx.active) prod[t] = r_z[t] * std::conj(res.X[t]);
  dbar_inverse_inplace(ctx.embed, prod, conv);
  double r = 0.0;
  for (std::size_t t = 0; t < N; ++t) r = std::max(r, std::abs(res.X[t] - rhs[t] - conv[t]));
  res.residual = r;
  return res;
}

namespace {

// C_K field: off-circle Cauchy integral of the ring function, truncated Fourier
// series evaluated on the active nodes plus any requested extras
void ck_field_on_active(const RhContext& ctx, const CauchyBoundary& cb, std::vector<cplx>& out) {
  const int n = cb.n();
  const auto& c = cb.coeffs();
  double cmax = 0.0;
  for (const cplx& v : c) cmax = std::max(cmax, std::abs(v));
  int s_pos = 0, s_neg = 0;
  for (int s = 0; s < n / 2; ++s)
    if (std::abs(c[s]) > 1e-15 * cmax) s_pos = s;
  for (int s = 1; s <= n / 2; ++s)
    if (std::abs(c[n - s]) > 1e-15 * cmax) s_neg = s;

  out.assign(ctx.embed.size(), 0.0);
  for (std::uint32_t t : ctx.active) {
    cplx lam = ctx.embed.node(static_cast<int>(t) % ctx.embed.n(),
                              static_cast<int>(t) / ctx.embed.n());
    if (std::abs(lam) < 1.0) {
      cplx acc = 0.0;
      for (int s = s_pos; s >= 0; --s) acc = acc * lam + c[s];
      out[t] = acc;
    } else {
      cplx inv = 1.0 / lam;
      cplx acc = 0.0;
      for (int s = s_neg; s >= 1; --s) acc = acc * inv + c[n - s];
      out[t] = -(acc * inv);
    }
  }
}

// minus-side ring values at radius 1 + h for all circle angles via FFT
std::vector<cplx> minus_ring(const CauchyBoundary& cb, double radius) {
  const int n = cb.n();
  std::vector<cplx> spec(n, 0.0);
  const auto& c = cb.coeffs();
  for (int s = 1; s <= n / 2; ++s) spec[n - s] = -c[n - s] * std::pow(radius, -s);
  fft::inverse1d(spec.data(), n);
  return spec;  // values at angles 2 pi b / n
}

}  // namespace

PQResult solve_pq(const RhContext& ctx, const std::vector<cplx>& r_z,
                  const CauchyBoundary& cb) {
  PQResult res;
  const std::size_t N = ctx.embed.size();
  std::vector<cplx> CK;
  ck_field_on_active(ctx, cb, CK);

  res.P_corr.assign(N, 0.0);
  res.Q.assign(N, 0.0);
  std::vector<cplx> prod(N, 0.0), conv;

  // Q = -dbar^{-1}[r conj(CK + Pc)], Pc = -dbar^{-1}[r conj(Q)]
  for (int it = 0; it < kFixedPointMax; ++it) {
    for (std::uint32_t t : ctx.active)
      prod[t] = r_z[t] * std::conj(CK[t] + res.P_corr[t]);
    dbar_inverse_inplace(ctx.embed, prod, conv);
    double delta = 0.0;
    for (std::size_t t = 0; t < N; ++t) {
      cplx next = -conv[t];
      delta = std::max(delta, std::abs(next - res.Q[t]));
      res.Q[t] = next;
    }
    for (std::uint32_t t : ctx.active) prod[t] = r_z[t] * std::conj(res.Q[t]);
    dbar_inverse_inplace(ctx.embed, prod, conv);
    for (std::size_t t = 0; t < N; ++t) {
      cplx next = -conv[t];
      delta = std::max(delta, std::abs(next - res.P_corr[t]));
      res.P_corr[t] = next;
    }
    res.iterations = it + 1;
    if (delta <= kFixedPointTol) break;
    if (it == kFixedPointMax - 1)
      throw Error(ErrCode::solver, "no-convergence: PQ aggregate iteration cap reached");
  }

  // trace of W = P - Q at the outer offset ring
  const int nc = ctx.n_circle;
  const double rad = 1.0 + ctx.sgrid.offset_h();
  std::vector<cplx> cring = minus_ring(cb, rad);
  res.trace_W.resize(nc);
  for (int b = 0; b < nc; ++b) {
    cplx node = std::polar(rad, ctx.sgrid.circle_angle(b));
    cplx pc = embed_interp(res.P_corr, ctx.embed, node);
    cplx q = embed_interp(res.Q, ctx.embed, node);
    res.trace_W[b] = cring[b] + pc - q;
  }
  return res;
}

KResult solve_K(const RhContext& ctx, const std::vector<cplx>& r_z,
                const std::vector<cplx>& e, cplx z) {
  const int nc = ctx.n_circle;
  KResult res;
  res.K.assign(nc, 0.0);
  if (!ctx.has_jump) return res;

  // rho_z matrix and the inhomogeneity from e on the circle
  Eigen::MatrixXcd Rz(nc, nc);
  for (int a = 0; a < nc; ++a) {
    cplx la = std::polar(1.0, ctx.sgrid.circle_angle(a));
    for (int b = 0; b < nc; ++b) {
      cplx lb = std::polar(1.0, ctx.sgrid.circle_angle(b));
      cplx rho_ab = ctx.rho[static_cast<std::size_t>(a) * nc + b];
      Rz(a, b) = rho_of_z(rho_ab, la, lb, z, ctx.E);
    }
  }
  const double w = ctx.sgrid.circle_weight();

  Eigen::VectorXcd e_circ(nc);
  for (int b = 0; b < nc; ++b)
    e_circ(b) = embed_interp(e, ctx.embed, std::polar(1.0, ctx.sgrid.circle_angle(b)));
  Eigen::VectorXcd rhs = w * (Rz * e_circ);

  // dominant complex-linear part: K -> rho_z . C_minus K at the outer ring
  const double rad = 1.0 + ctx.sgrid.offset_h();
  auto cminus_ring = [&](const Eigen::VectorXcd& x) {
    std::vector<cplx> spec(nc);
    for (int b = 0; b < nc; ++b) spec[b] = x(b);
    fft::forward1d(spec.data(), nc);
    for (int s = 0; s < nc; ++s) {
      int ss = s < nc / 2 ? s : s - nc;
      if (ss >= 0)
        spec[s] = 0.0;
      else
        spec[s] *= -std::pow(rad, ss) / static_cast<double>(nc);
    }
    fft::inverse1d(spec.data(), nc);
    Eigen::VectorXcd out(nc);
    for (int b = 0; b < nc; ++b) out(b) = spec[b];
    return out;
  };

  auto apply_dominant = [&](const Eigen::VectorXcd& x, Eigen::VectorXcd& out) {
    out = x - w * (Rz * cminus_ring(x));
  };

  Eigen::VectorXcd K = rhs;
  GmresReport rep = gmres<cplx>(apply_dominant, rhs, K, 30, 1e-12, 200);
  if (!rep.converged)
    throw Error(ErrCode::solver, "singular-system: K dominant solve failed");

  // defect correction with the exact operator (aggregated P,Q route)
  std::vector<cplx> Kv(nc);
  double resid = 0.0;
  for (int round = 0; round < 8; ++round) {
    for (int b = 0; b < nc; ++b) Kv[b] = K(b);
    CauchyBoundary cb(Kv);
    res.pq = solve_pq(ctx, r_z, cb);
    Eigen::VectorXcd theta_full(nc);
    Eigen::VectorXcd wtr(nc);
    for (int b = 0; b < nc; ++b) wtr(b) = res.pq.trace_W[b];
    theta_full = w * (Rz * wtr);
    Eigen::VectorXcd defect = rhs + theta_full - K;
    // the rhs of the K equation is rhs + nonlinear-in-K circle terms; the
    // dominant solve inverts the Cauchy part, the defect loop the rest
    resid = 0.0;
    for (int b = 0; b < nc; ++b) resid = std::max(resid, std::abs(defect(b)));
    res.defect_rounds = round + 1;
    double scale = std::max(1e-300, rhs.lpNorm<Eigen::Infinity>());
    if (resid <= 1e-9 * scale) break;
    Eigen::VectorXcd corr = defect;
    GmresReport r2 = gmres<cplx>(apply_dominant, defect, corr, 30, 1e-12, 200);
    if (!r2.converged)
      throw Error(ErrCode::solver, "singular-system: K defect solve failed");
    K += corr;
  }
  res.residual = resid;
  for (int b = 0; b < nc; ++b) res.K[b] = K(b);

  // final aggregated fields at the converged K
  CauchyBoundary cb(res.K);
  res.pq = solve_pq(ctx, r_z, cb);
  return res;
}

RHWorkspace solve_workspace(const RhContext& ctx, cplx z) {
  RHWorkspace ws;
  ws.z = z;
  ws.r_z = build_r_z_embed(ctx, z);
  EResult er = solve_e(ctx, ws.r_z);
  ws.e = std::move(er.e);
  ws.residuals["e"] = er.residual;
  if (ctx.has_jump) {
    KResult kr = solve_K(ctx, ws.r_z, ws.e, z);
    ws.K = std::move(kr.K);
    ws.P_corr = std::move(kr.pq.P_corr);
    ws.Q = std::move(kr.pq.Q);
    ws.residuals["K"] = kr.residual;
    ws.K_hat.assign(ws.K.begin(), ws.K.end());
    if (!ws.K.empty()) {
      fft::forward1d(ws.K_hat.data(), static_cast<int>(ws.K_hat.size()));
      for (cplx& c : ws.K_hat) c /= static_cast<double>(ws.K_hat.size());
    }
  }
  ws.mu_minus1 = mu_minus1_at(ctx, ws);
  return ws;
}

cplx mu_minus1_at(const RhContext& ctx, const RHWorkspace& ws) {
  const double cell = ctx.embed.cell();
  cplx term1 = 0.0;
  for (std::uint32_t t : ctx.active) term1 += ws.r_z[t] * std::conj(ws.e[t]);
  term1 *= cell / kPi;
  if (ws.K.empty()) return term1;

  const int nc = ctx.n_circle;
  // -(1/2 pi i) oint K d zeta = -(1/nc) sum K_b zeta_b
  cplx ring = 0.0;
  for (int b = 0; b < nc; ++b)
    ring += ws.K[b] * std::polar(1.0, ctx.sgrid.circle_angle(b));
  ring /= -static_cast<double>(nc);

  // recover C_K on active nodes for the P = C_K + P_corr quadrature
  CauchyBoundary cb(ws.K);
  std::vector<cplx> CK;
  ck_field_on_active(ctx, cb, CK);

  cplx termQ = 0.0, termP = 0.0;
  for (std::uint32_t t : ctx.active) {
    termQ += ws.r_z[t] * std::conj(ws.Q[t]);
    termP += ws.r_z[t] * std::conj(CK[t] + ws.P_corr[t]);
  }
  termQ *= cell / kPi;
  termP *= cell / kPi;
  return term1 + ring - termQ + termP;
}

cplx assemble_mu(const RhContext& ctx, const RHWorkspace& ws, cplx lambda) {
  const double cell = ctx.embed.cell();
  auto point_dbar = [&](const std::vector<cplx>& num) {
    // (1/pi) sum h^2 num_t / (lambda - lambda_t): direct quadrature of the
    // solid Cauchy integral at one point
    cplx acc = 0.0;
    for (std::uint32_t t : ctx.active) {
      cplx lam_t = ctx.embed.node(static_cast<int>(t) % ctx.embed.n(),
                                  static_cast<int>(t) / ctx.embed.n());
      acc += num[t] / (lambda - lam_t);
    }
    return acc * (cell / kPi);
  };

  std::vector<cplx> num(ctx.embed.size(), 0.0);
  for (std::uint32_t t : ctx.active) num[t] = ws.r_z[t] * std::conj(ws.e[t]);
  cplx mu = 1.0 + point_dbar(num);

  if (!ws.K.empty()) {
    CauchyBoundary cb(ws.K);
    cplx ck = cb.off_circle(lambda);
    std::vector<cplx> CK;
    ck_field_on_active(ctx, cb, CK);
    for (std::uint32_t t : ctx.active) num[t] = ws.r_z[t] * std::conj(ws.Q[t]);
    cplx pc = -point_dbar(num);
    for (std::uint32_t t : ctx.active)
      num[t] = ws.r_z[t] * std::conj(CK[t] + ws.P_corr[t]);
    cplx q = -point_dbar(num);
    mu += ck + pc - q;
  }
  return mu;
}

OmegaMoments omega_moments_direct(const RhContext& ctx, const std::vector<cplx>& r_z,
                                  cplx zeta) {
  XResult x1 = solve_X(ctx, r_z, zeta, XKind::X1);
  XResult x2 = solve_X(ctx, r_z, zeta, XKind::X2);
  OmegaMoments m;
  const double cell = ctx.embed.cell();
  cplx m1 = 0.0, m2 = 0.0;
  for (std::uint32_t t : ctx.active) {
    cplx o1 = x1.X[t] + kI * x2.X[t];
    cplx o2 = x1.X[t] - kI * x2.X[t];
    m1 += r_z[t] * std::conj(o1);
    m2 += r_z[t] * std::conj(o2);
  }
  m.M1 = m1 * cell / kPi;
  m.M2 = m2 * cell / kPi;
  return m;
}

void omega_moments_adjoint(const RhContext& ctx, const std::vector<cplx>& weight_field,
                           const std::vector<cplx>& r_z_op, std::vector<cplx>& M1,
                           std::vector<cplx>& M2) {
  // Solves the transposed stacked system S^T W = L for the four real
  // functionals derived from the weight, then pairs W against the analytic
  // pole data of every anchor. The real adjoint of u -> dbar^{-1}[r conj(u)]
  // is w -> -r dbar^{-1}[conj(w)] (the discrete Cauchy kernel is odd).
  const std::size_t N = ctx.embed.size();
  const double cell = ctx.embed.cell();

  auto adjoint_T = [&](const std::vector<cplx>& win, std::vector<cplx>& wout) {
    std::vector<cplx> cw(N, 0.0);
    for (std::size_t t = 0; t < N; ++t) cw[t] = std::conj(win[t]);
    dbar_inverse_inplace(ctx.embed, cw, wout);
    for (std::size_t t = 0; t < N; ++t) wout[t] = -r_z_op[t] * wout[t];
  };

  // stacked adjoint solve: W1 = L1 + T^T W2, W2 = L2 + T^T W1
  auto solve_adjoint = [&](const std::vector<cplx>& L1, const std::vector<cplx>& L2,
                           std::vector<cplx>& W1, std::vector<cplx>& W2) {
    W1 = L1;
    W2 = L2;
    std::vector<cplx> t1, t2;
    for (int it = 0; it < kFixedPointMax; ++it) {
      adjoint_T(W2, t1);
      adjoint_T(W1, t2);
      double delta = 0.0;
      for (std::size_t t = 0; t < N; ++t) {
        cplx n1 = L1[t] + t1[t];
        cplx n2 = L2[t] + t2[t];
        delta = std::max(delta, std::abs(n1 - W1[t]));
        delta = std::max(delta, std::abs(n2 - W2[t]));
        W1[t] = n1;
        W2[t] = n2;
      }
      if (delta <= kFixedPointTol) break;
      if (it == kFixedPointMax - 1)
        throw Error(ErrCode::solver, "no-convergence: adjoint moment solve");
    }
  };

  const cplx cre = cell / kPi;
  std::vector<cplx> zero(N, 0.0), Lre(N), Lim(N);
  for (std::size_t t = 0; t < N; ++t) {
    Lre[t] = cre * weight_field[t];
    Lim[t] = -kI * cre * weight_field[t];
  }

  // block-1 functionals give M1, block-2 give M2
  std::vector<cplx> W1a, W2a, W1b, W2b, W1c, W2c, W1d, W2d;
  solve_adjoint(Lre, zero, W1a, W2a);
  solve_adjoint(Lim, zero, W1b, W2b);
  solve_adjoint(zero, Lre, W1c, W2c);
  solve_adjoint(zero, Lim, W1d, W2d);

  const int nc = ctx.n_circle;
  M1.assign(nc, 0.0);
  M2.assign(nc, 0.0);

  // pairing <W, b(zeta)> = Re sum W1_t conj(q_zeta(lambda_t)); support of W is
  // the active set since every weight carries an r factor
  parallel_for(static_cast<std::size_t>(nc), [&](std::size_t bi) {
    cplx zeta = std::polar(1.0, ctx.sgrid.circle_angle(static_cast<int>(bi)));
    double re1 = 0.0, im1 = 0.0, re2 = 0.0, im2 = 0.0;
    for (std::uint32_t t : ctx.active) {
      cplx lam = ctx.embed.node(static_cast<int>(t) % ctx.embed.n(),
                                static_cast<int>(t) / ctx.embed.n());
      cplx cq = std::conj(cplx(1.0) / (zeta - lam));
      re1 += (W1a[t] * cq).real();
      im1 += (W1b[t] * cq).real();
      re2 += (W1c[t] * cq).real();
      im2 += (W1d[t] * cq).real();
    }
    M1[bi] = cplx(re1, im1);
    M2[bi] = cplx(re2, im2);
  });
}

AbcResult dz_mu_minus1_abc(const RhContext& ctx, cplx z) {
  AbcResult out;
  const double hz = 0.125 / ctx.E.sqrtE;
  const cplx steps[4] = {cplx(hz, 0), cplx(-hz, 0), cplx(0, hz), cplx(0, -hz)};

  RHWorkspace wc = solve_workspace(ctx, z);
  RHWorkspace wn[4];
  for (int d = 0; d < 4; ++d) wn[d] = solve_workspace(ctx, z + steps[d]);

  const std::size_t N = ctx.embed.size();
  const double cell = ctx.embed.cell();

  // A term: (1/pi) int r_z [ -(i/2) sqrt(E)(1/l + lbar) conj(e) + conj(dzbar e) ]
  cplx A = 0.0;
  for (std::uint32_t t : ctx.active) {
    cplx lam = ctx.embed.node(static_cast<int>(t) % ctx.embed.n(),
                              static_cast<int>(t) / ctx.embed.n());
    cplx ex = (wn[0].e[t] - wn[1].e[t]) / (2.0 * hz);
    cplx ey = (wn[2].e[t] - wn[3].e[t]) / (2.0 * hz);
    cplx dzbar_e = 0.5 * (ex + kI * ey);
    cplx wphase = -0.5 * kI * ctx.E.sqrtE * (1.0 / lam + std::conj(lam));
    A += wc.r_z[t] * (wphase * std::conj(wc.e[t]) + std::conj(dzbar_e));
  }
  A *= cell / kPi;
  out.A = A;

  if (!ctx.has_jump) {
    out.dz_mu = out.A;
    return out;
  }

  const int nc = ctx.n_circle;

  // K z-derivatives from the neighbor rings
  std::vector<cplx> dzK(nc), dzbarK(nc);
  for (int b = 0; b < nc; ++b) {
    cplx kx = (wn[0].K[b] - wn[1].K[b]) / (2.0 * hz);
    cplx ky = (wn[2].K[b] - wn[3].K[b]) / (2.0 * hz);
    dzK[b] = 0.5 * (kx - kI * ky);
    dzbarK[b] = 0.5 * (kx + kI * ky);
  }

  // center moments: plain weight and the phase-derivative weight
  std::vector<cplx> M1, M2, N1p, N2p;
  omega_moments_adjoint(ctx, wc.r_z, wc.r_z, M1, M2);
  std::vector<cplx> wphase_field(N, 0.0);
  for (std::uint32_t t : ctx.active) {
    cplx lam = ctx.embed.node(static_cast<int>(t) % ctx.embed.n(),
                              static_cast<int>(t) / ctx.embed.n());
    wphase_field[t] = wc.r_z[t] * (-0.5 * kI * ctx.E.sqrtE * (1.0 / lam + std::conj(lam)));
  }
  omega_moments_adjoint(ctx, wphase_field, wc.r_z, N1p, N2p);

  // mixed moments against neighbor-z operators for dzbar Omega
  std::vector<cplx> Mn1[4], Mn2[4];
  for (int d = 0; d < 4; ++d)
    omega_moments_adjoint(ctx, wc.r_z, wn[d].r_z, Mn1[d], Mn2[d]);
  std::vector<cplx> Mzb1(nc), Mzb2(nc);
  for (int b = 0; b < nc; ++b) {
    // moments already hold conj(Omega); conj(dzbar Omega) = (mx - i my)/2
    cplx mx1 = (Mn1[0][b] - Mn1[1][b]) / (2.0 * hz);
    cplx my1 = (Mn1[2][b] - Mn1[3][b]) / (2.0 * hz);
    Mzb1[b] = 0.5 * (mx1 - kI * my1);
    cplx mx2 = (Mn2[0][b] - Mn2[1][b]) / (2.0 * hz);
    cplx my2 = (Mn2[2][b] - Mn2[3][b]) / (2.0 * hz);
    Mzb2[b] = 0.5 * (mx2 - kI * my2);
  }

  cplx B = 0.0, C = 0.0;
  for (int b = 0; b < nc; ++b) {
    cplx zb = std::polar(1.0, ctx.sgrid.circle_angle(b));
    cplx gB = dzK[b] * (cplx(-1.0) + M2[b]) + wc.K[b] * (N2p[b] + Mzb2[b]);
    B += gB * zb;
    cplx gC = std::conj(dzbarK[b]) * M1[b] + std::conj(wc.K[b]) * (N1p[b] + Mzb1[b]);
    C += gC * std::conj(zb);
  }
  B /= static_cast<double>(nc);
  C /= static_cast<double>(nc);
  out.B = B;
  out.C = C;
  out.dz_mu = out.A + out.B + out.C;
  return out;
}

ReconstructionResult reconstruct_v(const ScatteringData& scat, const SpatialGrid& grid,
                                   Route route, const ReconstructOptions& opts) {
  RhContext ctx(scat, opts.conv_n);
  ReconstructionResult res;
  res.route = route;
  const int n = grid.n();
  res.mu_minus1.assign(grid.size(), 0.0);
  res.v_rec.assign(grid.size(), 0.0);

  std::vector<double> e_res(grid.size(), 0.0), k_res(grid.size(), 0.0);

  if (route == Route::spectral_dz) {
    parallel_for(grid.size(), [&](std::size_t t) {
      int i = static_cast<int>(t) % n, j = static_cast<int>(t) / n;
      RHWorkspace ws = solve_workspace(ctx, grid.z(i, j));
      res.mu_minus1[t] = ws.mu_minus1;
      e_res[t] = ws.residuals.count("e") ? ws.residuals["e"] : 0.0;
      k_res[t] = ws.residuals.count("K") ? ws.residuals["K"] : 0.0;
    });
    // spectral d/dz on the periodic box
    std::vector<cplx> work = res.mu_minus1;
    fft::forward2d(work, n, n);
    const double dp = kPi / grid.L();
    for (int j = 0; j < n; ++j) {
      int mj = j < n / 2 ? j : j - n;
      if (j == n / 2) mj = 0;  // drop the unpaired Nyquist mode
      for (int i = 0; i < n; ++i) {
        int mi = i < n / 2 ? i : i - n;
        if (i == n / 2) mi = 0;
        cplx dz_mult = 0.5 * (kI * dp * static_cast<double>(mi) -
                              kI * (kI * dp * static_cast<double>(mj)));
        work[static_cast<std::size_t>(j) * n + i] *= dz_mult;
      }
    }
    fft::inverse2d(work, n, n);
    const double norm = 1.0 / (static_cast<double>(n) * n);
    const cplx vfac = 2.0 * kI * ctx.E.sqrtE;
    for (std::size_t t = 0; t < grid.size(); ++t) res.v_rec[t] = vfac * work[t] * norm;
  } else {
    parallel_for(grid.size(), [&](std::size_t t) {
      int i = static_cast<int>(t) % n, j = static_cast<int>(t) / n;
      AbcResult abc = dz_mu_minus1_abc(ctx, grid.z(i, j));
      res.v_rec[t] = 2.0 * kI * ctx.E.sqrtE * abc.dz_mu;
    });
  }

  double emax = 0.0, kmax = 0.0;
  for (std::size_t t = 0; t < grid.size(); ++t) {
    emax = std::max(emax, e_res[t]);
    kmax = std::max(kmax, k_res[t]);
  }
  res.residual_maxima["e"] = emax;
  res.residual_maxima["K"] = kmax;

  double im_sup = 0.0;
  for (const cplx& v : res.v_rec) im_sup = std::max(im_sup, std::abs(v.imag()));
  res.im_sup = im_sup;

  if (opts.truth) {
    double err = 0.0, scale = 0.0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        if (std::hypot(grid.x(i), grid.y(j)) >= opts.truth->D_radius) continue;
        std::size_t t = grid.idx(i, j);
        err = std::max(err, std::abs(res.v_rec[t] - opts.truth->values[t]));
        scale = std::max(scale, std::abs(opts.truth->values[t]));
      }
    res.error_vs_truth = scale > 0 ? err / scale : err;
  }
  return res;
}

}  // namespace dbar
