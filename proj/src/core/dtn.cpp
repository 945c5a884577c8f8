#include "core/dtn.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>
#include <random>

#include "core/fft.hpp"

namespace dbar {

std::vector<cplx> BoundaryOperator::apply(const std::vector<cplx>& f) const {
  if (static_cast<int>(f.size()) != n_b) fail_invalid("boundary trace size mismatch");
  std::vector<cplx> out(n_b, 0.0);
  for (int i = 0; i < n_b; ++i) {
    cplx acc = 0.0;
    const cplx* row = matrix.data() + static_cast<std::size_t>(i) * n_b;
    for (int j = 0; j < n_b; ++j) acc += row[j] * f[j];
    out[i] = acc;
  }
  return out;
}

namespace {

struct DiscFD {
  int n_fd;
  double h;
  double box;                       // grid covers [-box, box]
  std::vector<int> unknown_index;   // -1 outside disc
  std::vector<std::pair<int, int>> unknown_node;
  Eigen::SparseMatrix<double> A;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  // boundary couplings: for each unknown, list of (angle, coefficient) with
  // which Dirichlet data enters the right-hand side
  std::vector<std::vector<std::pair<double, double>>> bc;

  double x(int i) const { return -box + h * i; }
  int idx(int i, int j) const { return unknown_index[static_cast<std::size_t>(j) * n_fd + i]; }
};

double interp_potential(const PotentialField& v, double x, double y) {
  const int n = v.n;
  const double h = 2.0 * v.L / n;
  double fx = (x + v.L) / h, fy = (y + v.L) / h;
  int i0 = static_cast<int>(std::floor(fx));
  int j0 = static_cast<int>(std::floor(fy));
  double tx = fx - i0, ty = fy - j0;
  auto at = [&](int i, int j) -> double {
    if (i < 0 || i >= n || j < 0 || j >= n) return 0.0;
    return v.values[static_cast<std::size_t>(j) * n + i];
  };
  return (1 - tx) * (1 - ty) * at(i0, j0) + tx * (1 - ty) * at(i0 + 1, j0) +
         (1 - tx) * ty * at(i0, j0 + 1) + tx * ty * at(i0 + 1, j0 + 1);
}

// crossing fraction s in (0,1]: |p + s h u| = 1 for the unit direction u
double boundary_fraction(double px, double py, double ux, double uy, double h) {
  double b = px * ux + py * uy;
  double c = px * px + py * py - 1.0;
  double disc = std::max(b * b - c, 0.0);
  double s_phys = -b + std::sqrt(disc);
  return s_phys / h;
}

void build_disc_fd(const PotentialField& v, double E, int n_fd, DiscFD& fd) {
  fd.n_fd = n_fd;
  fd.box = 1.05;
  fd.h = 2.0 * fd.box / (n_fd - 1);
  fd.unknown_index.assign(static_cast<std::size_t>(n_fd) * n_fd, -1);

  for (int j = 0; j < n_fd; ++j)
    for (int i = 0; i < n_fd; ++i) {
      double x = fd.x(i), y = fd.x(j);
      if (x * x + y * y < 1.0) {
        fd.unknown_index[static_cast<std::size_t>(j) * n_fd + i] =
            static_cast<int>(fd.unknown_node.size());
        fd.unknown_node.emplace_back(i, j);
      }
    }

  const int N = static_cast<int>(fd.unknown_node.size());
  fd.bc.resize(N);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(N) * 5);

  const int di[4] = {1, -1, 0, 0};
  const int dj[4] = {0, 0, 1, -1};
  for (int u = 0; u < N; ++u) {
    auto [i, j] = fd.unknown_node[u];
    double x = fd.x(i), y = fd.x(j);
    double diag = interp_potential(v, x, y) - E;  // -lap + (v - E)

    // x and y second derivatives with Shortley-Weller cut arms
    for (int axis = 0; axis < 2; ++axis) {
      double arm[2];
      int nb_idx[2];
      double bc_angle[2];
      for (int s = 0; s < 2; ++s) {
        int d = 2 * axis + s;
        int ii = i + di[d], jj = j + dj[d];
        int nb = (ii >= 0 && ii < n_fd && jj >= 0 && jj < n_fd) ? fd.idx(ii, jj) : -1;
        if (nb >= 0) {
          arm[s] = 1.0;
          nb_idx[s] = nb;
          bc_angle[s] = 0.0;
        } else {
          double frac = boundary_fraction(x, y, di[d], dj[d], fd.h);
          frac = std::clamp(frac, 1e-6, 1.0);
          arm[s] = frac;
          nb_idx[s] = -1;
          double bx = x + frac * fd.h * di[d], by = y + frac * fd.h * dj[d];
          bc_angle[s] = std::atan2(by, bx);
        }
      }
      double h1 = arm[0] * fd.h, h2 = arm[1] * fd.h;
      double c1 = 2.0 / (h1 * (h1 + h2));
      double c2 = 2.0 / (h2 * (h1 + h2));
      diag += 2.0 / (h1 * h2);  // -u'' center coefficient
      for (int s = 0; s < 2; ++s) {
        double c = s == 0 ? c1 : c2;
        if (nb_idx[s] >= 0)
          trip.emplace_back(u, nb_idx[s], -c);
        else
          fd.bc[u].emplace_back(bc_angle[s], c);  // moves to RHS with +c
      }
    }
    trip.emplace_back(u, u, diag);
  }

  fd.A.resize(N, N);
  fd.A.setFromTriplets(trip.begin(), trip.end());
  fd.A.makeCompressed();
  fd.lu.compute(fd.A);
  if (fd.lu.info() != Eigen::Success)
    throw Error(ErrCode::solver, "dirichlet-eigenvalue-hit: interior system singular");
}

// local quadratic least-squares sample of the interior solution
double sample_solution(const DiscFD& fd, const Eigen::VectorXd& u, double x, double y) {
  int ic = static_cast<int>(std::round((x + fd.box) / fd.h));
  int jc = static_cast<int>(std::round((y + fd.box) / fd.h));
  Eigen::MatrixXd M(25, 6);
  Eigen::VectorXd rhs(25);
  int count = 0;
  for (int dj = -2; dj <= 2 && count < 25; ++dj)
    for (int di = -2; di <= 2 && count < 25; ++di) {
      int i = ic + di, j = jc + dj;
      if (i < 0 || i >= fd.n_fd || j < 0 || j >= fd.n_fd) continue;
      int idx = fd.idx(i, j);
      if (idx < 0) continue;
      double dx = (fd.x(i) - x) / fd.h, dy = (fd.x(j) - y) / fd.h;
      if (dx * dx + dy * dy > 6.25) continue;
      M.row(count) << 1.0, dx, dy, dx * dx, dx * dy, dy * dy;
      rhs(count) = u(idx);
      ++count;
    }
  if (count < 6) fail_solver("dtn normal-derivative sampling: too few interior nodes");
  Eigen::MatrixXd Ms = M.topRows(count);
  Eigen::VectorXd rs = rhs.head(count);
  Eigen::VectorXd coef = (Ms.transpose() * Ms).ldlt().solve(Ms.transpose() * rs);
  return coef(0);
}

}  // namespace

BoundaryOperator assemble_dtn(const PotentialField& v, const EnergyContext& E, int n_b,
                              int n_fd) {
  if (n_b < 64) fail_invalid("assemble_dtn requires N_b >= 64");
  if (n_fd < 64) fail_invalid("assemble_dtn requires n_fd >= 64");
  DiscFD fd;
  build_disc_fd(v, E.E, n_fd, fd);
  const int N = static_cast<int>(fd.unknown_node.size());

  // numeric guard for the (direig) assumption
  {
    Eigen::VectorXd probe = Eigen::VectorXd::Ones(N);
    Eigen::VectorXd sol = fd.lu.solve(probe);
    if (fd.lu.info() != Eigen::Success || !sol.allFinite() ||
        sol.norm() > 1e8 * probe.norm())
      throw Error(ErrCode::solver, "dirichlet-eigenvalue-hit: interior solve ill-conditioned");
  }

  BoundaryOperator op;
  op.n_b = n_b;
  op.E = E.E;
  op.matrix.assign(static_cast<std::size_t>(n_b) * n_b, 0.0);

  const double delta = 2.0 * fd.h;  // one-sided radial step

  // solve per Fourier mode m (conjugate symmetry handles -m), accumulate the
  // nodal matrix: M = sum_m neumann_m outer (1/N_b) e^{-i m theta_j}
  std::vector<std::vector<cplx>> neumann(n_b, std::vector<cplx>(n_b, 0.0));
  Eigen::VectorXd rhs_re(N), rhs_im(N);
  for (int mm = 0; mm <= n_b / 2; ++mm) {
    rhs_re.setZero();
    rhs_im.setZero();
    for (int u = 0; u < N; ++u)
      for (const auto& [ang, coef] : fd.bc[u]) {
        rhs_re(u) += coef * std::cos(mm * ang);
        rhs_im(u) += coef * std::sin(mm * ang);
      }
    Eigen::VectorXd ure = fd.lu.solve(rhs_re);
    Eigen::VectorXd uim = fd.lu.solve(rhs_im);
    if (fd.lu.info() != Eigen::Success)
      throw Error(ErrCode::solver, "dirichlet-eigenvalue-hit: interior solve failed");

    std::vector<cplx>& nm = neumann[mm];
    for (int jb = 0; jb < n_b; ++jb) {
      double th = 2.0 * kPi * jb / n_b;
      double cx = std::cos(th), sy = std::sin(th);
      cplx f0 = std::polar(1.0, mm * th);
      cplx u1{sample_solution(fd, ure, cx * (1 - delta), sy * (1 - delta)),
              sample_solution(fd, uim, cx * (1 - delta), sy * (1 - delta))};
      cplx u2{sample_solution(fd, ure, cx * (1 - 2 * delta), sy * (1 - 2 * delta)),
              sample_solution(fd, uim, cx * (1 - 2 * delta), sy * (1 - 2 * delta))};
      cplx u3{sample_solution(fd, ure, cx * (1 - 3 * delta), sy * (1 - 3 * delta)),
              sample_solution(fd, uim, cx * (1 - 3 * delta), sy * (1 - 3 * delta))};
      nm[jb] = (11.0 * f0 - 18.0 * u1 + 9.0 * u2 - 2.0 * u3) / (6.0 * delta);
    }
  }

  // nodal matrix assembly: data d_j -> trig-interpolant coefficients ->
  // response. The unpaired Nyquist component of real data is the cosine mode,
  // whose response is the real part of the top solve.
  for (int i = 0; i < n_b; ++i)
    for (int j = 0; j < n_b; ++j) {
      double th = 2.0 * kPi * j / n_b;
      cplx acc = 0.0;
      for (int mm = -(n_b / 2 - 1); mm <= n_b / 2 - 1; ++mm) {
        int am = std::abs(mm);
        cplx nm = neumann[am][i];
        if (mm < 0) nm = std::conj(nm);
        acc += nm * std::polar(1.0 / n_b, -mm * th);
      }
      acc += neumann[n_b / 2][i].real() * std::cos(n_b / 2 * th) / static_cast<double>(n_b);
      op.at(i, j) = acc;
    }
  return op;
}

double opnorm_linf(const BoundaryOperator& d) {
  double best = 0.0;
  for (int i = 0; i < d.n_b; ++i) {
    double row = 0.0;
    for (int j = 0; j < d.n_b; ++j) row += std::abs(d.at(i, j));
    best = std::max(best, row);
  }
  return best;
}

double opnorm_linf_diff(const BoundaryOperator& a, const BoundaryOperator& b) {
  if (a.n_b != b.n_b) fail_invalid("opnorm_linf_diff: size mismatch");
  double best = 0.0;
  for (int i = 0; i < a.n_b; ++i) {
    double row = 0.0;
    for (int j = 0; j < a.n_b; ++j) row += std::abs(a.at(i, j) - b.at(i, j));
    best = std::max(best, row);
  }
  return best;
}

PerturbResult perturb_dtn(const BoundaryOperator& phi, double delta_target, PerturbMode mode,
                          std::uint64_t seed, const BoundaryOperator* phi2) {
  if (delta_target < 0) fail_invalid("perturb_dtn: delta_target >= 0 required");
  PerturbResult out;
  if (mode == PerturbMode::second_potential) {
    if (!phi2) fail_invalid("perturb_dtn: second_potential mode needs the second operator");
    out.op = *phi2;
    out.measured_delta = opnorm_linf_diff(out.op, phi);
    return out;
  }
  out.op = phi;
  if (delta_target == 0.0) {
    out.measured_delta = 0.0;
    return out;
  }
  const int n = phi.n_b;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  BoundaryOperator pert;
  pert.n_b = n;
  pert.E = phi.E;
  pert.matrix.assign(static_cast<std::size_t>(n) * n, 0.0);
  if (mode == PerturbMode::random_uniform) {
    for (auto& e : pert.matrix) e = cplx(uni(rng), uni(rng));
  } else {  // rank_one
    std::vector<cplx> u(n), w(n);
    for (auto& e : u) e = cplx(uni(rng), uni(rng));
    for (auto& e : w) e = cplx(uni(rng), uni(rng));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) pert.at(i, j) = u[i] * w[j];
  }
  double norm = opnorm_linf(pert);
  double scale = delta_target / norm;
  for (std::size_t t = 0; t < pert.matrix.size(); ++t)
    out.op.matrix[t] = phi.matrix[t] + scale * pert.matrix[t];
  out.measured_delta = opnorm_linf_diff(out.op, phi);
  return out;
}

std::vector<cplx> dtn_fourier_matrix(const BoundaryOperator& op) {
  // F^{-1} Phi F with F the nodal-from-coefficients map e^{i m theta_j}
  const int n = op.n_b;
  std::vector<cplx> out(static_cast<std::size_t>(n) * n, 0.0);
  std::vector<cplx> col(n), resp(n);
  for (int mcol = -n / 2; mcol < n / 2; ++mcol) {
    for (int j = 0; j < n; ++j) col[j] = std::polar(1.0, mcol * 2.0 * kPi * j / n);
    resp = op.apply(col);
    // project response back on modes
    for (int mrow = -n / 2; mrow < n / 2; ++mrow) {
      cplx acc = 0.0;
      for (int j = 0; j < n; ++j) acc += resp[j] * std::polar(1.0 / n, -mrow * 2.0 * kPi * j / n);
      out[static_cast<std::size_t>(mrow + n / 2) * n + (mcol + n / 2)] = acc;
    }
  }
  return out;
}

}  // namespace dbar
