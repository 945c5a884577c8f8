#pragma once

#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/grids.hpp"

namespace dbar {

// Flat binary field files: one ASCII header line
//   DBARLAB FIELD v1 <n> <L> <re|im|realonly>
// followed by row-major little-endian doubles (interleaved re,im pairs for
// complex fields).
void write_field_real(const std::string& path, const std::vector<double>& values, int n, double L);
void write_field_complex(const std::string& path, const std::vector<cplx>& values, int n, double L);

struct FieldFile {
  int n = 0;
  double L = 0.0;
  bool complex_valued = false;
  std::vector<double> re;
  std::vector<double> im;  // empty for realonly
};
FieldFile read_field(const std::string& path);

// CSV inspection export (x, y, re, im), 17 significant digits.
void write_field_csv(const std::string& path, const std::vector<cplx>& values, int n, double L);
void write_field_csv_real(const std::string& path, const std::vector<double>& values, int n,
                          double L);

// DtN operator: header "DBARLAB DTN v1 <N_b> <E>" + row-major complex doubles.
void write_dtn(const std::string& path, const std::vector<cplx>& matrix, int n_b, double E);
struct DtnFile {
  int n_b = 0;
  double E = 0.0;
  std::vector<cplx> matrix;
};
DtnFile read_dtn(const std::string& path);
void write_dtn_csv(const std::string& path, const std::vector<cplx>& matrix, int n_b);

// Scattering data: header "DBARLAB SCAT v1 <E> <n_radii> <n_theta> <N_T>"
// + r block (n_radii*n_theta complex) + rho block (N_T*N_T complex).
void write_scat(const std::string& path, double E, int n_radii, int n_theta, int n_circle,
                const std::vector<cplx>& r_values, const std::vector<cplx>& rho_values);
struct ScatFile {
  double E = 0.0;
  int n_radii = 0, n_theta = 0, n_circle = 0;
  std::vector<cplx> r_values;
  std::vector<cplx> rho_values;
};
ScatFile read_scat(const std::string& path);

void write_r_csv(const std::string& path, const std::vector<cplx>& r_values,
                 const SpectralGrid& grid);
void write_rho_csv(const std::string& path, const std::vector<cplx>& rho_values,
                   const SpectralGrid& grid);

// Run metadata: config echo plus version/seed lines.
void write_metadata(const std::string& path, const Config& cfg,
                    const std::vector<std::pair<std::string, std::string>>& extra);

std::string format_g17(double v);

}  // namespace dbar
