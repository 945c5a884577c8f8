#include "core/harness.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>

#include "core/io.hpp"
#include "core/norms.hpp"

namespace dbar {

double bound_shape(double E, double delta, double tau, int m) {
  double holder = E * std::pow(delta, tau);
  double logpart = std::pow(std::sqrt(E) + (1.0 - tau) * std::log(3.0 + 1.0 / delta),
                            -(static_cast<double>(m) - 2.0));
  return holder + logpart;
}

std::pair<double, double> fit_bound(std::vector<StabilityRecord>& records, int m, double tau) {
  if (records.size() < 3) fail_invalid("fit_bound needs at least 3 records");
  double se = 0.0, ss = 0.0, emax = 0.0;
  for (const auto& r : records) {
    double s = bound_shape(r.E, r.delta, tau, m);
    se += r.sup_error * s;
    ss += s * s;
    emax = std::max(emax, r.sup_error);
  }
  if (emax == 0.0) throw Error(ErrCode::invalid_argument, "degenerate-fit: all errors zero");
  double c_ls = std::max(se / ss, 0.0);
  double preclamp = 0.0, c_clamp = 0.0;
  for (const auto& r : records) {
    double s = bound_shape(r.E, r.delta, tau, m);
    if (c_ls > 0) preclamp = std::max(preclamp, r.sup_error / (c_ls * s));
    c_clamp = std::max(c_clamp, r.sup_error / s);
  }
  for (auto& r : records) r.bound_value = c_clamp * bound_shape(r.E, r.delta, tau, m);
  return {c_clamp, preclamp};
}

LogFit fit_log_bound(const std::vector<StabilityRecord>& records, int m) {
  (void)m;
  if (records.size() < 4) throw Error(ErrCode::invalid_argument, "insufficient-span: need >= 4 records");
  double dmin = records.front().delta, dmax = records.front().delta;
  for (const auto& r : records) {
    dmin = std::min(dmin, r.delta);
    dmax = std::max(dmax, r.delta);
  }
  if (dmax / dmin < 99.0)
    throw Error(ErrCode::invalid_argument, "insufficient-span: need >= 2 decades of delta");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& r : records) {
    if (r.sup_error <= 0) continue;
    double x = std::log(std::log(3.0 + 1.0 / r.delta));
    double y = std::log(r.sup_error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 4) throw Error(ErrCode::invalid_argument, "insufficient-span: too few nonzero errors");
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  double intercept = (sy - slope * sx) / n;
  LogFit f;
  f.alpha_hat = -slope;
  f.C2 = std::exp(intercept);
  return f;
}

RunSetup setup_from_config(const Config& cfg) {
  RunSetup s;
  s.grid_n = cfg.get_int("grid.n", s.grid_n);
  s.grid_L = cfg.get_double("grid.L", s.grid_L);
  s.lambda_max = cfg.get_double("spectral.lambda_max", s.lambda_max);
  s.n_radii = cfg.get_int("spectral.n_radii", s.n_radii);
  s.n_theta = cfg.get_int("spectral.n_theta", s.n_theta);
  s.n_circle = cfg.get_int("spectral.n_circle", s.n_circle);
  s.offset_h = cfg.get_double("spectral.offset_h", s.offset_h);
  s.n_b = cfg.get_int("dtn.n_b", s.n_b);
  s.n_fd = cfg.get_int("dtn.n_fd", s.n_fd);
  s.conv_n = cfg.get_int("rh.conv_n", s.conv_n);
  std::string kind = cfg.get_str("potential.kind", "bump");
  if (kind == "zero")
    s.kind = PotentialKind::zero;
  else if (kind == "bump")
    s.kind = PotentialKind::bump;
  else if (kind == "two_bumps")
    s.kind = PotentialKind::two_bumps;
  else if (kind == "custom_samples")
    s.kind = PotentialKind::custom_samples;
  else
    fail_config("unknown potential.kind: " + kind);
  s.params = cfg.get_list("potential.params", s.params);
  s.params2 = cfg.get_list("potential.params2", s.params2);
  s.m = cfg.get_int("experiment.m", s.m);
  s.alpha = cfg.get_double("experiment.alpha", s.alpha);
  s.E = cfg.get_double("experiment.E", s.E);
  s.E_list = cfg.get_list("experiment.E_list", s.E_list);
  s.delta_list = cfg.get_list("experiment.delta_list", s.delta_list);
  s.tau = cfg.get_double("experiment.tau", s.tau);
  s.seed = static_cast<std::uint64_t>(cfg.get_int("experiment.seed", 1));
  s.mode = cfg.get_str("experiment.mode", s.mode);
  std::string route = cfg.get_str("rh.route", "spectral_dz");
  if (route == "spectral_dz")
    s.route = Route::spectral_dz;
  else if (route == "abc" || route == "abc_formula")
    s.route = Route::abc_formula;
  else
    fail_config("unknown rh.route: " + route);
  return s;
}

SpatialGrid make_spatial_grid(const RunSetup& s) { return SpatialGrid(s.grid_n, s.grid_L); }

SpectralGrid make_spectral_grid(const RunSetup& s) {
  return SpectralGrid(s.lambda_max, s.n_radii, s.n_theta, s.n_circle, s.offset_h);
}

PotentialField make_potential(const RunSetup& s, const SpatialGrid& grid, bool second) {
  if (second) {
    if (s.params2.empty()) fail_config("potential.params2 required for a potential pair");
    return build_potential(s.kind, s.params2, grid, s.m);
  }
  return build_potential(s.kind, s.params, grid, s.m);
}

RoundtripResult run_roundtrip(const RunSetup& s) {
  auto t0 = std::chrono::steady_clock::now();
  SpatialGrid grid = make_spatial_grid(s);
  SpectralGrid sgrid = make_spectral_grid(s);
  EnergyContext E(s.E);
  PotentialField v = make_potential(s, grid);

  RoundtripResult out;
  out.scat = build_scattering(v, grid, sgrid, E);
  ReconstructOptions ro;
  ro.conv_n = s.conv_n;
  ro.truth = &v;
  out.rec = reconstruct_v(out.scat, grid, s.route, ro);
  if (v.is_zero()) {
    double sup = 0.0;
    for (const cplx& x : out.rec.v_rec) sup = std::max(sup, std::abs(x));
    out.sup_error = sup;
  } else {
    out.sup_error = out.rec.error_vs_truth;
  }
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

namespace {

PerturbMode mode_from_string(const std::string& s) {
  if (s == "random_uniform") return PerturbMode::random_uniform;
  if (s == "rank_one") return PerturbMode::rank_one;
  if (s == "second_potential") return PerturbMode::second_potential;
  fail_config("unknown experiment.mode: " + s);
}

double sup_diff_on_disc(const std::vector<cplx>& a, const std::vector<cplx>& b,
                        const SpatialGrid& grid, double radius) {
  double sup = 0.0;
  for (int j = 0; j < grid.n(); ++j)
    for (int i = 0; i < grid.n(); ++i) {
      if (std::hypot(grid.x(i), grid.y(j)) >= radius) continue;
      sup = std::max(sup, std::abs(a[grid.idx(i, j)] - b[grid.idx(i, j)]));
    }
  return sup;
}

// perturbed scattering data from the boundary identities: r gets the (aless)
// increment, f the Prop.-3.1 increment pushed through the h -> rho chain
ScatteringData perturbed_scattering(const ScatteringData& base, const SpectralGrid& sgrid,
                                    const EnergyContext& E, const BoundaryOperator& phi1,
                                    const BoundaryOperator& phi2) {
  ScatteringData sd = base;

  // r increment per annulus node; psi traces reuse the stored forward sweep,
  // the second-potential trace linearized to the first (delta-small regime)
  const int nb = base.n_b;
  parallel_for(sgrid.annulus_size(), [&](std::size_t t) {
    int ir = static_cast<int>(t) / sgrid.n_theta();
    int jt = static_cast<int>(t) % sgrid.n_theta();
    cplx lam = sgrid.node(ir, jt);
    std::size_t t_inv = sgrid.annulus_idx(sgrid.inverse_radius_index(ir), jt);
    std::vector<cplx> tr1(base.psi_traces.begin() + t_inv * nb,
                          base.psi_traces.begin() + (t_inv + 1) * nb);
    std::vector<cplx> tr2(base.psi_traces.begin() + t * nb,
                          base.psi_traces.begin() + (t + 1) * nb);
    cplx db = diff_b_from_dtn(phi1, phi2, tr1, tr2);
    sd.r_values[t] = base.r_values[t] + r_of_lambda(db, lam);
  });

  // f increment on the torus, then the second-kind chain to rho
  const int nc = base.n_circle;
  TorusKernel ftil = base.f;
  for (int a = 0; a < nc; ++a) {
    std::vector<cplx> tr_a(base.phi_traces.begin() + static_cast<std::size_t>(a) * nb,
                           base.phi_traces.begin() + (static_cast<std::size_t>(a) + 1) * nb);
    for (int b = 0; b < nc; ++b) {
      // phi1^+(x, -k(lambda'_b)): -k(lambda') = k(-lambda'), half a turn away
      int b_minus = (b + nc / 2) % nc;
      std::vector<cplx> tr_b(base.phi_traces.begin() + static_cast<std::size_t>(b_minus) * nb,
                             base.phi_traces.begin() + (static_cast<std::size_t>(b_minus) + 1) * nb);
      cplx df = diff_f_from_dtn(phi1, phi2, tr_b, tr_a);
      ftil.at(a, b) = base.f.at(a, b) + df;
    }
  }
  TorusKernel hp = hpm_from_f(ftil, Side::plus, sgrid);
  TorusKernel hm = hpm_from_f(ftil, Side::minus, sgrid);
  auto [h1, h2] = h12_from_hpm(hp, hm, sgrid);
  RhoResult rr = solve_rho(h1, h2, sgrid);
  sd.rho_values = rr.rho.values;
  sd.rho_consistency = rr.consistency;
  sd.f = std::move(ftil);
  sd.h_plus = std::move(hp);
  sd.h_minus = std::move(hm);
  sd.h1 = std::move(h1);
  sd.h2 = std::move(h2);
  return sd;
}

}  // namespace

SweepReport sweep_delta(const RunSetup& s) {
  SpatialGrid grid = make_spatial_grid(s);
  SpectralGrid sgrid = make_spectral_grid(s);
  EnergyContext E(s.E);
  PotentialField v1 = make_potential(s, grid);
  PerturbMode mode = mode_from_string(s.mode);
  if (mode == PerturbMode::second_potential)
    fail_config("sweep_delta uses synthetic perturbations; use sweep_energy for pairs");

  BoundaryOperator phi1 = assemble_dtn(v1, E, s.n_b, s.n_fd);

  ScatterOptions so;
  so.with_traces = true;
  so.n_b = s.n_b;
  ScatteringData scat = build_scattering(v1, grid, sgrid, E, so);

  ReconstructOptions ro;
  ro.conv_n = s.conv_n;
  ReconstructionResult base_rec = reconstruct_v(scat, grid, s.route, ro);

  SweepReport rep;
  std::vector<double> deltas = s.delta_list;
  std::sort(deltas.begin(), deltas.end());
  for (double delta_target : deltas) {
    PerturbResult pr = perturb_dtn(phi1, delta_target, mode, s.seed);
    ScatteringData sd = perturbed_scattering(scat, sgrid, E, phi1, pr.op);
    ReconstructionResult rec = reconstruct_v(sd, grid, s.route, ro);
    StabilityRecord r;
    r.E = s.E;
    r.delta = pr.measured_delta;
    r.tau = s.tau;
    r.sup_error = sup_diff_on_disc(rec.v_rec, base_rec.v_rec, grid, v1.D_radius);
    r.diagnostics["rho_consistency"] = sd.rho_consistency;
    r.diagnostics["e_residual_max"] = rec.residual_maxima.count("e") ? rec.residual_maxima["e"] : 0;
    r.diagnostics["K_residual_max"] = rec.residual_maxima.count("K") ? rec.residual_maxima["K"] : 0;
    rep.records.push_back(std::move(r));
  }

  bool monotone = true;
  for (std::size_t i = 1; i < rep.records.size(); ++i)
    if (rep.records[i].sup_error < rep.records[i - 1].sup_error * (1.0 - 1e-12)) monotone = false;
  rep.monotonicity_flag = monotone;

  auto [c1, resid] = fit_bound(rep.records, s.m, s.tau);
  rep.fitted_C1 = c1;
  rep.fit_residual = resid;
  return rep;
}

SweepReport sweep_energy(const RunSetup& s) {
  SpatialGrid grid = make_spatial_grid(s);
  PotentialField v1 = make_potential(s, grid);
  PotentialField v2 = make_potential(s, grid, true);

  SweepReport rep;
  std::vector<double> elist = s.E_list;
  std::sort(elist.begin(), elist.end());
  for (double energy : elist) {
    EnergyContext E(energy);
    SpectralGrid sgrid = make_spectral_grid(s);
    BoundaryOperator phi1 = assemble_dtn(v1, E, s.n_b, s.n_fd);
    BoundaryOperator phi2 = assemble_dtn(v2, E, s.n_b, s.n_fd);
    double delta = opnorm_linf_diff(phi1, phi2);

    ScatteringData s1 = build_scattering(v1, grid, sgrid, E);
    ScatteringData s2 = build_scattering(v2, grid, sgrid, E);
    ReconstructOptions ro;
    ro.conv_n = s.conv_n;
    ro.truth = &v1;
    ReconstructionResult r1 = reconstruct_v(s1, grid, s.route, ro);
    ro.truth = &v2;
    ReconstructionResult r2 = reconstruct_v(s2, grid, s.route, ro);

    StabilityRecord r;
    r.E = energy;
    r.delta = delta;
    r.tau = s.tau;
    r.sup_error = sup_diff_on_disc(r2.v_rec, r1.v_rec, grid, v1.D_radius);
    r.diagnostics["roundtrip_err_v1"] = r1.error_vs_truth;
    r.diagnostics["roundtrip_err_v2"] = r2.error_vs_truth;
    rep.records.push_back(std::move(r));
  }

  double dmin = rep.records.front().delta, dmax = dmin;
  bool decreasing = true;
  for (std::size_t i = 0; i < rep.records.size(); ++i) {
    dmin = std::min(dmin, rep.records[i].delta);
    dmax = std::max(dmax, rep.records[i].delta);
    if (i > 0 && rep.records[i].sup_error >= rep.records[i - 1].sup_error) decreasing = false;
  }
  // refuse the flag when delta drifts by more than 2x across the sweep
  rep.monotonicity_flag = decreasing && (dmax <= 2.0 * dmin);

  auto [c1, resid] = fit_bound(rep.records, s.m, s.tau);
  rep.fitted_C1 = c1;
  rep.fit_residual = resid;
  return rep;
}

void write_sweep_csv(const std::string& path, const SweepReport& rep) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail_io("cannot open for writing: " + path);
  out << "E,delta,tau,sup_error,bound_value,flag\n";
  for (const auto& r : rep.records)
    out << format_g17(r.E) << "," << format_g17(r.delta) << "," << format_g17(r.tau) << ","
        << format_g17(r.sup_error) << "," << format_g17(r.bound_value) << ","
        << (rep.monotonicity_flag ? 1 : 0) << "\n";
}

int selftest(bool verbose) {
  int failures = 0;
  auto check = [&](bool ok, const char* name) {
    if (!ok) ++failures;
    if (verbose) std::cerr << (ok ? "  ok  " : " FAIL ") << name << "\n";
  };

  // lambda -> k algebra
  {
    EnergyContext E(4.0);
    Momentum k = lambda_to_k(cplx(1.0, 0.0), E);
    check(std::abs(k.k1 - cplx(2.0, 0.0)) < 1e-12 && std::abs(k.k2) < 1e-12, "lambda_to_k at 1");
    Momentum ki = lambda_to_k(cplx(0.0, 1.0), E);
    check(std::abs(ki.k1) < 1e-12 && std::abs(ki.k2 - cplx(2.0, 0.0)) < 1e-12, "lambda_to_k at i");
  }
  // r vanishes on the circle
  check(std::abs(r_of_lambda(cplx(1.0, 0.3), std::polar(1.0, 0.7))) == 0.0, "r on circle");
  // Cauchy integral of constants
  {
    std::vector<cplx> ones(64, 1.0);
    CauchyBoundary cb(ones);
    check(std::abs(cb.plus(std::polar(1.0, 0.3)) - 1.0) < 1e-12, "C+ of 1");
    check(std::abs(cb.minus(std::polar(1.0, 0.3))) < 1e-12, "C- of 1");
  }
  // zero potential: mu = 1 exactly and the zero pipeline collapses
  {
    SpatialGrid grid(32, 1.5);
    EnergyContext E(25.0);
    PotentialField v = build_potential(PotentialKind::zero, {}, grid);
    MuSolution sol = solve_mu(v, grid, cplx(2.0, 0.0), E);
    double dev = 0.0;
    for (const cplx& m : sol.mu) dev = std::max(dev, std::abs(m - 1.0));
    check(dev == 0.0 && sol.residual == 0.0, "zero potential mu == 1");

    SpectralGrid sg(8.0, 16, 16, 32, 1e-3);
    ScatteringData sd = build_scattering(v, grid, sg, E);
    ReconstructOptions ro;
    ro.conv_n = 64;
    ReconstructionResult rec = reconstruct_v(sd, grid, Route::spectral_dz, ro);
    double sup = 0.0;
    for (const cplx& x : rec.v_rec) sup = std::max(sup, std::abs(x));
    check(sup <= 1e-6, "zero pipeline");
  }
  // theta mask convention
  check(heaviside(0.0) == 0.5 && heaviside(1.0) == 1.0 && heaviside(-1.0) == 0.0,
        "heaviside convention");
  return failures;
}

}  // namespace dbar
