#include "dbarlab.h"

#include <chrono>
#include <cstring>
#include <string>

#include "core/harness.hpp"
#include "core/io.hpp"

using namespace dbar;

namespace {

thread_local std::string g_last_error;

int map_error(const Error& e) {
  g_last_error = e.what();
  switch (e.code()) {
    case ErrCode::config:
      return DBAR_E_CONFIG;
    case ErrCode::solver:
      return DBAR_E_SOLVER;
    case ErrCode::io:
      return DBAR_E_IO;
    default:
      return DBAR_E_INVALID;
  }
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    return DBAR_OK;
  } catch (const Error& e) {
    return map_error(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return DBAR_E_SOLVER;
  }
}

std::string prefix_path(const char* prefix, const char* suffix) {
  return std::string(prefix) + suffix;
}

}  // namespace

struct dbar_config {
  Config cfg;
};

struct dbar_field {
  FieldFile file;
};

extern "C" {

const char* dbar_version(void) { return "1.0.0"; }

const char* dbar_last_error(void) { return g_last_error.c_str(); }

int dbar_config_create(dbar_config** out) {
  if (!out) return DBAR_E_INVALID;
  *out = new dbar_config();
  return DBAR_OK;
}

int dbar_config_load(const char* path, dbar_config** out) {
  if (!path || !out) return DBAR_E_INVALID;
  *out = nullptr;
  auto holder = new dbar_config();
  int rc = guarded([&] { holder->cfg = Config::from_file(path); });
  if (rc != DBAR_OK) {
    delete holder;
    return rc;
  }
  *out = holder;
  return DBAR_OK;
}

int dbar_config_set(dbar_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) return DBAR_E_INVALID;
  cfg->cfg.set(key, value);
  return DBAR_OK;
}

int dbar_config_get(const dbar_config* cfg, const char* key, char* buf, size_t bufsize) {
  if (!cfg || !key || !buf || bufsize == 0) return DBAR_E_INVALID;
  if (!cfg->cfg.has(key)) {
    g_last_error = std::string("missing config key: ") + key;
    return DBAR_E_CONFIG;
  }
  std::string v = cfg->cfg.get_str(key, "");
  std::snprintf(buf, bufsize, "%s", v.c_str());
  return DBAR_OK;
}

void dbar_config_free(dbar_config* cfg) { delete cfg; }

int dbar_run_forward(const dbar_config* cfg, const char* out_prefix) {
  if (!cfg || !out_prefix) return DBAR_E_INVALID;
  return guarded([&] {
    RunSetup s = setup_from_config(cfg->cfg);
    SpatialGrid grid = make_spatial_grid(s);
    EnergyContext E(s.E);
    PotentialField v = make_potential(s, grid);
    std::vector<double> lam = cfg->cfg.get_list("forward.lambda", {2.0, 0.0});
    if (lam.size() != 2) fail_config("forward.lambda must be 're,im'");
    auto t0 = std::chrono::steady_clock::now();
    MuSolution sol = solve_mu(v, grid, cplx(lam[0], lam[1]), E);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_field_complex(prefix_path(out_prefix, "_mu.bin"), sol.mu, grid.n(), grid.L());
    write_field_csv(prefix_path(out_prefix, "_mu.csv"), sol.mu, grid.n(), grid.L());
    write_metadata(prefix_path(out_prefix, "_meta.txt"), cfg->cfg,
                   {{"run.kind", "forward"},
                    {"run.residual", format_g17(sol.residual)},
                    {"run.condition_estimate", format_g17(sol.condition_estimate)},
                    {"run.wall_seconds", format_g17(secs)}});
  });
}

int dbar_run_dtn(const dbar_config* cfg, const char* out_prefix) {
  if (!cfg || !out_prefix) return DBAR_E_INVALID;
  return guarded([&] {
    RunSetup s = setup_from_config(cfg->cfg);
    SpatialGrid grid = make_spatial_grid(s);
    EnergyContext E(s.E);
    PotentialField v = make_potential(s, grid);
    auto t0 = std::chrono::steady_clock::now();
    BoundaryOperator op = assemble_dtn(v, E, s.n_b, s.n_fd);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_dtn(prefix_path(out_prefix, "_dtn.bin"), op.matrix, op.n_b, op.E);
    write_dtn_csv(prefix_path(out_prefix, "_dtn.csv"), op.matrix, op.n_b);
    write_metadata(prefix_path(out_prefix, "_meta.txt"), cfg->cfg,
                   {{"run.kind", "dtn"}, {"run.wall_seconds", format_g17(secs)}});
  });
}

int dbar_run_scatter(const dbar_config* cfg, const char* out_prefix) {
  if (!cfg || !out_prefix) return DBAR_E_INVALID;
  return guarded([&] {
    RunSetup s = setup_from_config(cfg->cfg);
    SpatialGrid grid = make_spatial_grid(s);
    SpectralGrid sgrid = make_spectral_grid(s);
    EnergyContext E(s.E);
    PotentialField v = make_potential(s, grid);
    auto t0 = std::chrono::steady_clock::now();
    ScatteringData sd = build_scattering(v, grid, sgrid, E);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_scat(prefix_path(out_prefix, "_scat.bin"), sd.E, sd.n_radii, sd.n_theta, sd.n_circle,
               sd.r_values, sd.rho_values);
    write_r_csv(prefix_path(out_prefix, "_r.csv"), sd.r_values, sgrid);
    write_rho_csv(prefix_path(out_prefix, "_rho.csv"), sd.rho_values, sgrid);
    write_metadata(prefix_path(out_prefix, "_meta.txt"), cfg->cfg,
                   {{"run.kind", "scatter"},
                    {"run.rho_consistency", format_g17(sd.rho_consistency)},
                    {"run.rho_decay_ok", sd.rho_decay_ok ? "1" : "0"},
                    {"run.wall_seconds", format_g17(secs)}});
  });
}

int dbar_run_reconstruct(const dbar_config* cfg, const char* scat_path, int grid_n,
                         const char* route, const char* out_prefix) {
  if (!cfg || !scat_path || !route || !out_prefix) return DBAR_E_INVALID;
  return guarded([&] {
    RunSetup s = setup_from_config(cfg->cfg);
    ScatFile file = read_scat(scat_path);
    ScatteringData sd;
    sd.E = file.E;
    sd.n_radii = file.n_radii;
    sd.n_theta = file.n_theta;
    sd.n_circle = file.n_circle;
    sd.r_values = std::move(file.r_values);
    sd.rho_values = std::move(file.rho_values);
    // grid geometry not carried by the file header comes from the config
    sd.lambda_max = s.lambda_max;
    sd.offset_h = s.offset_h;

    std::string route_s(route);
    Route rt;
    if (route_s == "spectral_dz")
      rt = Route::spectral_dz;
    else if (route_s == "abc" || route_s == "abc_formula")
      rt = Route::abc_formula;
    else
      fail_config("unknown route: " + route_s);

    SpatialGrid grid(grid_n > 0 ? grid_n : s.grid_n, s.grid_L);
    ReconstructOptions ro;
    ro.conv_n = s.conv_n;
    PotentialField truth;
    bool have_truth = cfg->cfg.has("potential.kind");
    if (have_truth) {
      truth = make_potential(s, grid);
      ro.truth = &truth;
    }
    auto t0 = std::chrono::steady_clock::now();
    ReconstructionResult rec = reconstruct_v(sd, grid, rt, ro);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    write_field_complex(prefix_path(out_prefix, "_vrec.bin"), rec.v_rec, grid.n(), grid.L());
    write_field_csv(prefix_path(out_prefix, "_vrec.csv"), rec.v_rec, grid.n(), grid.L());
    write_field_complex(prefix_path(out_prefix, "_mu1.bin"), rec.mu_minus1, grid.n(), grid.L());
    std::vector<std::pair<std::string, std::string>> extra = {
        {"run.kind", "reconstruct"},
        {"run.route", route_s},
        {"run.E", format_g17(sd.E)},
        {"run.im_sup", format_g17(rec.im_sup)},
        {"run.wall_seconds", format_g17(secs)}};
    for (const auto& [k, vview] : rec.residual_maxima)
      extra.emplace_back("run.residual_max." + k, format_g17(vview));
    if (rec.error_vs_truth >= 0)
      extra.emplace_back("run.error_vs_truth", format_g17(rec.error_vs_truth));
    write_metadata(prefix_path(out_prefix, "_meta.txt"), cfg->cfg, extra);
  });
}

int dbar_run_sweep_delta(const dbar_config* cfg, const char* out_prefix) {
  if (!cfg || !out_prefix) return DBAR_E_INVALID;
  return guarded([&] {
    RunSetup s = setup_from_config(cfg->cfg);
    auto t0 = std::chrono::steady_clock::now();
    SweepReport rep = sweep_delta(s);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_sweep_csv(prefix_path(out_prefix, "_sweep.csv"), rep);
    write_metadata(prefix_path(out_prefix, "_meta.txt"), cfg->cfg,
                   {{"run.kind", "sweep-delta"},
                    {"run.fitted_C1", format_g17(rep.fitted_C1)},
                    {"run.fit_residual", format_g17(rep.fit_residual)},
                    {"run.monotone", rep.monotonicity_flag ? "1" : "0"},
                    {"run.seed", std::to_string(s.seed)},
                    {"run.wall_seconds", format_g17(secs)}});
  });
}

int dbar_run_sweep_energy(const dbar_config* cfg, const char* out_prefix) {
  if (!cfg || !out_prefix) return DBAR_E_INVALID;
  return guarded([&] {
    RunSetup s = setup_from_config(cfg->cfg);
    auto t0 = std::chrono::steady_clock::now();
    SweepReport rep = sweep_energy(s);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_sweep_csv(prefix_path(out_prefix, "_sweep.csv"), rep);
    write_metadata(prefix_path(out_prefix, "_meta.txt"), cfg->cfg,
                   {{"run.kind", "sweep-energy"},
                    {"run.fitted_C1", format_g17(rep.fitted_C1)},
                    {"run.fit_residual", format_g17(rep.fit_residual)},
                    {"run.monotone", rep.monotonicity_flag ? "1" : "0"},
                    {"run.wall_seconds", format_g17(secs)}});
  });
}

int dbar_run_selftest(int verbose) {
  int failures = 0;
  int rc = guarded([&] { failures = selftest(verbose != 0); });
  if (rc != DBAR_OK) return rc;
  if (failures > 0) {
    g_last_error = std::to_string(failures) + " selftest checks failed";
    return DBAR_E_SOLVER;
  }
  return DBAR_OK;
}

int dbar_field_read(const char* path, dbar_field** out) {
  if (!path || !out) return DBAR_E_INVALID;
  *out = nullptr;
  auto holder = new dbar_field();
  int rc = guarded([&] { holder->file = read_field(path); });
  if (rc != DBAR_OK) {
    delete holder;
    return rc;
  }
  *out = holder;
  return DBAR_OK;
}

int dbar_field_size(const dbar_field* f, int* n_out) {
  if (!f || !n_out) return DBAR_E_INVALID;
  *n_out = f->file.n;
  return DBAR_OK;
}

int dbar_field_get(const dbar_field* f, size_t index, double* re_out, double* im_out) {
  if (!f || !re_out || !im_out) return DBAR_E_INVALID;
  if (index >= f->file.re.size()) return DBAR_E_INVALID;
  *re_out = f->file.re[index];
  *im_out = f->file.complex_valued ? f->file.im[index] : 0.0;
  return DBAR_OK;
}

void dbar_field_free(dbar_field* f) { delete f; }

}  // extern "C"
