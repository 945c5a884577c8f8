#include "core/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace dbar {

std::string format_g17(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

void write_doubles(std::ofstream& out, const double* data, std::size_t count) {
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
}

std::vector<double> read_doubles(std::ifstream& in, std::size_t count) {
  std::vector<double> v(count);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) fail_io("unexpected end of binary block");
  return v;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail_io("cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_io("cannot open for reading: " + path);
  return in;
}

}  // namespace

void write_field_real(const std::string& path, const std::vector<double>& values, int n, double L) {
  auto out = open_out(path);
  out << "DBARLAB FIELD v1 " << n << " " << format_g17(L) << " realonly\n";
  write_doubles(out, values.data(), values.size());
}

void write_field_complex(const std::string& path, const std::vector<cplx>& values, int n, double L) {
  auto out = open_out(path);
  out << "DBARLAB FIELD v1 " << n << " " << format_g17(L) << " re|im\n";
  write_doubles(out, reinterpret_cast<const double*>(values.data()), 2 * values.size());
}

FieldFile read_field(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  std::getline(in, line);
  std::istringstream hs(line);
  std::string magic, kind, ver, tag;
  FieldFile f;
  hs >> magic >> kind >> ver >> f.n >> f.L >> tag;
  if (magic != "DBARLAB" || kind != "FIELD" || ver != "v1" || f.n <= 0)
    fail_io("bad field header in " + path);
  std::size_t count = static_cast<std::size_t>(f.n) * f.n;
  if (tag == "realonly") {
    f.complex_valued = false;
    f.re = read_doubles(in, count);
  } else if (tag == "re|im") {
    f.complex_valued = true;
    auto raw = read_doubles(in, 2 * count);
    f.re.resize(count);
    f.im.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      f.re[i] = raw[2 * i];
      f.im[i] = raw[2 * i + 1];
    }
  } else {
    fail_io("bad field tag in " + path + ": " + tag);
  }
  return f;
}

void write_field_csv(const std::string& path, const std::vector<cplx>& values, int n, double L) {
  auto out = open_out(path);
  out << "x,y,re,im\n";
  double h = 2.0 * L / n;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const cplx& v = values[static_cast<std::size_t>(j) * n + i];
      out << format_g17(-L + h * i) << "," << format_g17(-L + h * j) << ","
          << format_g17(v.real()) << "," << format_g17(v.imag()) << "\n";
    }
}

void write_field_csv_real(const std::string& path, const std::vector<double>& values, int n,
                          double L) {
  std::vector<cplx> tmp(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) tmp[i] = values[i];
  write_field_csv(path, tmp, n, L);
}

void write_dtn(const std::string& path, const std::vector<cplx>& matrix, int n_b, double E) {
  auto out = open_out(path);
  out << "DBARLAB DTN v1 " << n_b << " " << format_g17(E) << "\n";
  write_doubles(out, reinterpret_cast<const double*>(matrix.data()), 2 * matrix.size());
}

DtnFile read_dtn(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  std::getline(in, line);
  std::istringstream hs(line);
  std::string magic, kind, ver;
  DtnFile d;
  hs >> magic >> kind >> ver >> d.n_b >> d.E;
  if (magic != "DBARLAB" || kind != "DTN" || ver != "v1" || d.n_b <= 0)
    fail_io("bad dtn header in " + path);
  std::size_t count = static_cast<std::size_t>(d.n_b) * d.n_b;
  auto raw = read_doubles(in, 2 * count);
  d.matrix.resize(count);
  for (std::size_t i = 0; i < count; ++i) d.matrix[i] = {raw[2 * i], raw[2 * i + 1]};
  return d;
}

void write_dtn_csv(const std::string& path, const std::vector<cplx>& matrix, int n_b) {
  auto out = open_out(path);
  out << "row,col,re,im\n";
  for (int i = 0; i < n_b; ++i)
    for (int j = 0; j < n_b; ++j) {
      const cplx& v = matrix[static_cast<std::size_t>(i) * n_b + j];
      out << i << "," << j << "," << format_g17(v.real()) << "," << format_g17(v.imag()) << "\n";
    }
}

void write_scat(const std::string& path, double E, int n_radii, int n_theta, int n_circle,
                const std::vector<cplx>& r_values, const std::vector<cplx>& rho_values) {
  auto out = open_out(path);
  out << "DBARLAB SCAT v1 " << format_g17(E) << " " << n_radii << " " << n_theta << " "
      << n_circle << "\n";
  write_doubles(out, reinterpret_cast<const double*>(r_values.data()), 2 * r_values.size());
  write_doubles(out, reinterpret_cast<const double*>(rho_values.data()), 2 * rho_values.size());
}

ScatFile read_scat(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  std::getline(in, line);
  std::istringstream hs(line);
  std::string magic, kind, ver;
  ScatFile s;
  hs >> magic >> kind >> ver >> s.E >> s.n_radii >> s.n_theta >> s.n_circle;
  if (magic != "DBARLAB" || kind != "SCAT" || ver != "v1" || s.n_radii <= 0)
    fail_io("bad scat header in " + path);
  std::size_t nr = static_cast<std::size_t>(s.n_radii) * s.n_theta;
  std::size_t nrho = static_cast<std::size_t>(s.n_circle) * s.n_circle;
  auto raw_r = read_doubles(in, 2 * nr);
  auto raw_rho = read_doubles(in, 2 * nrho);
  s.r_values.resize(nr);
  for (std::size_t i = 0; i < nr; ++i) s.r_values[i] = {raw_r[2 * i], raw_r[2 * i + 1]};
  s.rho_values.resize(nrho);
  for (std::size_t i = 0; i < nrho; ++i) s.rho_values[i] = {raw_rho[2 * i], raw_rho[2 * i + 1]};
  return s;
}

void write_r_csv(const std::string& path, const std::vector<cplx>& r_values,
                 const SpectralGrid& grid) {
  auto out = open_out(path);
  out << "abs_lambda,arg_lambda,re_r,im_r\n";
  for (int ir = 0; ir < grid.n_radii(); ++ir)
    for (int jt = 0; jt < grid.n_theta(); ++jt) {
      const cplx& v = r_values[grid.annulus_idx(ir, jt)];
      out << format_g17(grid.radii()[ir]) << "," << format_g17(grid.theta(jt)) << ","
          << format_g17(v.real()) << "," << format_g17(v.imag()) << "\n";
    }
}

void write_rho_csv(const std::string& path, const std::vector<cplx>& rho_values,
                   const SpectralGrid& grid) {
  auto out = open_out(path);
  out << "arg_lambda,arg_lambda_prime,re_rho,im_rho\n";
  int nc = grid.n_circle();
  for (int a = 0; a < nc; ++a)
    for (int b = 0; b < nc; ++b) {
      const cplx& v = rho_values[static_cast<std::size_t>(a) * nc + b];
      out << format_g17(grid.circle_angle(a)) << "," << format_g17(grid.circle_angle(b)) << ","
          << format_g17(v.real()) << "," << format_g17(v.imag()) << "\n";
    }
}

void write_metadata(const std::string& path, const Config& cfg,
                    const std::vector<std::pair<std::string, std::string>>& extra) {
  auto out = open_out(path);
  out << "# dbarlab run metadata\n";
  out << "dbarlab.version = 1.0.0\n";
  out << "dbarlab.format = v1\n";
  for (const auto& [k, v] : extra) out << k << " = " << v << "\n";
  out << cfg.dump();
}

}  // namespace dbar
