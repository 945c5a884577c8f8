#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "core/io.hpp"

using namespace dbar;

namespace {
struct TmpDir {
  std::filesystem::path dir;
  TmpDir() {
    dir = std::filesystem::temp_directory_path() / "dbarlab_io_test";
    std::filesystem::create_directories(dir);
  }
  std::string path(const char* name) const { return (dir / name).string(); }
};
}  // namespace

TEST_CASE("field round trip preserves bits") {
  TmpDir tmp;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uni(-1, 1);
  int n = 16;
  std::vector<cplx> vals(static_cast<std::size_t>(n) * n);
  for (auto& v : vals) v = {uni(rng), uni(rng)};
  write_field_complex(tmp.path("f.bin"), vals, n, 1.5);
  FieldFile f = read_field(tmp.path("f.bin"));
  REQUIRE(f.n == n);
  CHECK(f.L == 1.5);
  REQUIRE(f.complex_valued);
  for (std::size_t t = 0; t < vals.size(); ++t) {
    CHECK(f.re[t] == vals[t].real());
    CHECK(f.im[t] == vals[t].imag());
  }

  std::vector<double> rv(vals.size());
  for (std::size_t t = 0; t < rv.size(); ++t) rv[t] = vals[t].real();
  write_field_real(tmp.path("g.bin"), rv, n, 1.5);
  FieldFile g = read_field(tmp.path("g.bin"));
  CHECK_FALSE(g.complex_valued);
  for (std::size_t t = 0; t < rv.size(); ++t) CHECK(g.re[t] == rv[t]);
}

TEST_CASE("dtn and scat round trips") {
  TmpDir tmp;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uni(-1, 1);
  int nb = 8;
  std::vector<cplx> m(static_cast<std::size_t>(nb) * nb);
  for (auto& v : m) v = {uni(rng), uni(rng)};
  write_dtn(tmp.path("d.bin"), m, nb, 25.0);
  DtnFile d = read_dtn(tmp.path("d.bin"));
  CHECK(d.n_b == nb);
  CHECK(d.E == 25.0);
  for (std::size_t t = 0; t < m.size(); ++t) CHECK(d.matrix[t] == m[t]);

  std::vector<cplx> r(12 * 8), rho(16 * 16);
  for (auto& v : r) v = {uni(rng), uni(rng)};
  for (auto& v : rho) v = {uni(rng), uni(rng)};
  write_scat(tmp.path("s.bin"), 100.0, 12, 8, 16, r, rho);
  ScatFile s = read_scat(tmp.path("s.bin"));
  CHECK(s.E == 100.0);
  CHECK(s.n_radii == 12);
  CHECK(s.n_theta == 8);
  CHECK(s.n_circle == 16);
  for (std::size_t t = 0; t < r.size(); ++t) CHECK(s.r_values[t] == r[t]);
  for (std::size_t t = 0; t < rho.size(); ++t) CHECK(s.rho_values[t] == rho[t]);
}

TEST_CASE("config parsing") {
  Config cfg = Config::from_string(
      "# comment\n"
      "grid.n = 64\n"
      "grid.L = 1.5  # trailing comment\n"
      "experiment.E_list = 25, 100, 400\n"
      "potential.kind = bump\n");
  CHECK(cfg.get_int("grid.n", 0) == 64);
  CHECK(cfg.get_double("grid.L", 0) == 1.5);
  auto lst = cfg.get_list("experiment.E_list", {});
  REQUIRE(lst.size() == 3);
  CHECK(lst[1] == 100.0);
  CHECK(cfg.get_str("potential.kind", "") == "bump");
  CHECK(cfg.get_str("missing", "fallback") == "fallback");
  CHECK_THROWS_AS(Config::from_string("novalue\n"), Error);
  CHECK_THROWS_AS(Config::from_file("/nonexistent/path.cfg"), Error);
}

TEST_CASE("metadata echoes config") {
  TmpDir tmp;
  Config cfg = Config::from_string("grid.n = 32\n");
  write_metadata(tmp.path("m.txt"), cfg, {{"run.kind", "test"}});
  std::ifstream in(tmp.path("m.txt"));
  std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(all.find("grid.n = 32") != std::string::npos);
  CHECK(all.find("run.kind = test") != std::string::npos);
}
