#pragma once

#include <optional>
#include <string>

#include "core/config.hpp"
#include "core/rh.hpp"

namespace dbar {

// One experiment row of a stability sweep.
struct StabilityRecord {
  double E = 0.0;
  double delta = 0.0;       // measured DtN operator distance
  double tau = 1.0;
  double sup_error = 0.0;   // L-infinity(D) difference of the reconstructions
  double bound_value = 0.0; // C1 (E delta^tau + (sqrt(E)+(1-tau)log(3+1/delta))^-(m-2))
  std::map<std::string, double> diagnostics;
};

struct SweepReport {
  std::vector<StabilityRecord> records;
  double fitted_C1 = 0.0;
  double fit_residual = 0.0;  // pre-clamp residual diagnostic (max err / LS envelope)
  bool monotonicity_flag = false;
};

// envelope shape of the two-term stability estimate
double bound_shape(double E, double delta, double tau, int m);

// smallest C1 whose envelope majorizes every record, with the least-squares
// pre-clamp residual reported as the scientific diagnostic
std::pair<double, double> fit_bound(std::vector<StabilityRecord>& records, int m, double tau);

// logarithmic-regime fit: err ~ C2 (log(3+1/delta))^-alpha
struct LogFit {
  double C2 = 0.0;
  double alpha_hat = 0.0;
};
LogFit fit_log_bound(const std::vector<StabilityRecord>& records, int m);

// Full experiment setup decoded from config keys.
struct RunSetup {
  int grid_n = 64;
  double grid_L = 1.5;
  double lambda_max = 8.0;
  int n_radii = 64, n_theta = 64, n_circle = 256;
  double offset_h = 1e-3;
  int n_b = 128, n_fd = 256, conv_n = 256;
  PotentialKind kind = PotentialKind::bump;
  std::vector<double> params{1.0, 0.5, 0.0, 0.0};
  std::vector<double> params2;  // second potential of a pair (may be empty)
  int m = 3;
  double alpha = 0.5;
  double E = 100.0;
  std::vector<double> E_list{25.0, 100.0, 400.0};
  std::vector<double> delta_list{1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
  double tau = 1.0;
  std::uint64_t seed = 1u;
  std::string mode = "rank_one";
  Route route = Route::spectral_dz;
};
RunSetup setup_from_config(const Config& cfg);

SpatialGrid make_spatial_grid(const RunSetup& s);
SpectralGrid make_spectral_grid(const RunSetup& s);
PotentialField make_potential(const RunSetup& s, const SpatialGrid& grid, bool second = false);

struct RoundtripResult {
  ReconstructionResult rec;
  ScatteringData scat;
  double sup_error = 0.0;  // relative sup over D against the input potential
  double wall_seconds = 0.0;
};
RoundtripResult run_roundtrip(const RunSetup& s);

// delta sweep: perturb the assembled DtN map, push the perturbation through
// the boundary identities to perturbed (r, rho), reconstruct, and compare to
// the unperturbed reconstruction.
SweepReport sweep_delta(const RunSetup& s);

// energy sweep over a fixed potential pair; sup_error is the reconstruction
// pair difference, with round-trip errors stored as diagnostics
SweepReport sweep_energy(const RunSetup& s);

// quick zero-case/identity suite; returns the number of failed checks
int selftest(bool verbose);

void write_sweep_csv(const std::string& path, const SweepReport& rep);

}  // namespace dbar
