// dbarlab CLI: thin shell over the C API in include/dbarlab.h.

#include <CLI11.hpp>
#include <cstdio>
#include <string>

#include "dbarlab.h"

namespace {

int exit_code(int rc) {
  switch (rc) {
    case DBAR_OK:
      return 0;
    case DBAR_E_CONFIG:
    case DBAR_E_INVALID:
    case DBAR_E_IO:
      return 2;
    case DBAR_E_SOLVER:
      return 3;
    default:
      return 1;
  }
}

int report(int rc) {
  if (rc != DBAR_OK) std::fprintf(stderr, "dbarlab: %s\n", dbar_last_error());
  return exit_code(rc);
}

struct ConfigGuard {
  dbar_config* cfg = nullptr;
  ~ConfigGuard() { dbar_config_free(cfg); }
};

int load_config(const std::string& path, ConfigGuard& g) {
  if (path.empty()) return dbar_config_create(&g.cfg);
  return dbar_config_load(path.c_str(), &g.cfg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dbarlab: 2-D inverse scattering at fixed positive energy"};
  app.require_subcommand(1);

  std::string config_path, out_prefix = "dbarlab_out", scat_path, route = "spectral_dz";
  int grid_n = 0;
  bool verbose = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "config file (key = value lines)");
    sub->add_option("--out", out_prefix, "output artifact prefix");
  };

  CLI::App* c_forward = app.add_subcommand("forward", "solve the Faddeev eigenfunction at one lambda");
  add_common(c_forward);
  CLI::App* c_dtn = app.add_subcommand("dtn", "assemble the Dirichlet-to-Neumann matrix");
  add_common(c_dtn);
  CLI::App* c_scatter = app.add_subcommand("scatter", "compute scattering data (r, rho)");
  add_common(c_scatter);
  CLI::App* c_rec = app.add_subcommand("reconstruct", "reconstruct the potential from scattering data");
  c_rec->add_option("--scat", scat_path, "scattering data file")->required();
  c_rec->add_option("--grid", grid_n, "reconstruction grid size n");
  c_rec->add_option("--route", route, "spectral_dz | abc");
  add_common(c_rec);
  CLI::App* c_sd = app.add_subcommand("sweep-delta", "stability sweep over DtN perturbation size");
  add_common(c_sd);
  CLI::App* c_se = app.add_subcommand("sweep-energy", "stability sweep over energy for a potential pair");
  add_common(c_se);
  CLI::App* c_self = app.add_subcommand("selftest", "run the quick invariant suite");
  c_self->add_flag("-v,--verbose", verbose, "print each check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (app.got_subcommand(c_self)) return report(dbar_run_selftest(verbose ? 1 : 0));

  ConfigGuard guard;
  int rc = load_config(config_path, guard);
  if (rc != DBAR_OK) return report(rc);

  if (app.got_subcommand(c_forward)) rc = dbar_run_forward(guard.cfg, out_prefix.c_str());
  else if (app.got_subcommand(c_dtn)) rc = dbar_run_dtn(guard.cfg, out_prefix.c_str());
  else if (app.got_subcommand(c_scatter)) rc = dbar_run_scatter(guard.cfg, out_prefix.c_str());
  else if (app.got_subcommand(c_rec))
    rc = dbar_run_reconstruct(guard.cfg, scat_path.c_str(), grid_n, route.c_str(),
                              out_prefix.c_str());
  else if (app.got_subcommand(c_sd)) rc = dbar_run_sweep_delta(guard.cfg, out_prefix.c_str());
  else if (app.got_subcommand(c_se)) rc = dbar_run_sweep_energy(guard.cfg, out_prefix.c_str());

  return report(rc);
}
