#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <functional>

#include "core/common.hpp"

namespace dbar {

struct GmresReport {
  int iterations = 0;
  double residual = 0.0;      // relative to ||b||
  bool converged = false;
  double condition = 1.0;     // smax/smin of the final Hessenberg block
};

// Restarted GMRES for x = A^{-1} b with a matrix-free operator. Works for
// real scalars (realified conjugate-linear systems) and complex scalars.
// The Hessenberg singular values give a cheap estimate of the operator
// conditioning seen by the Krylov space; exceptional-point detection keys
// off that estimate.
template <typename Scalar>
GmresReport gmres(const std::function<void(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>&,
                                           Eigen::Matrix<Scalar, Eigen::Dynamic, 1>&)>& apply,
                  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& b,
                  Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x, int restart = 30,
                  double tol = 1e-10, int max_iters = 500) {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  GmresReport rep;
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    x.setZero(b.size());
    rep.converged = true;
    return rep;
  }
  if (x.size() != b.size()) x = Vec::Zero(b.size());

  Vec r(b.size()), w(b.size());
  int total = 0;
  double cond = 1.0;

  while (total < max_iters) {
    apply(x, w);
    r = b - w;
    double beta = r.norm();
    rep.residual = beta / bnorm;
    if (rep.residual <= tol) {
      rep.converged = true;
      break;
    }
    int m = std::min(restart, max_iters - total);
    Mat V(b.size(), m + 1);
    Mat H = Mat::Zero(m + 1, m);
    V.col(0) = r / beta;
    int k = 0;
    for (; k < m; ++k) {
      apply(V.col(k), w);
      for (int j = 0; j <= k; ++j) {
        H(j, k) = V.col(j).adjoint() * w;
        w -= H(j, k) * V.col(j);
      }
      // one round of reorthogonalization keeps the basis clean for the
      // condition estimate
      for (int j = 0; j <= k; ++j) {
        Scalar c = V.col(j).adjoint() * w;
        H(j, k) += c;
        w -= c * V.col(j);
      }
      double hn = w.norm();
      H(k + 1, k) = Scalar(hn);
      ++total;
      if (hn < 1e-14 * bnorm) {
        ++k;
        break;
      }
      V.col(k + 1) = w / hn;
      // cheap convergence probe via the small least-squares problem
      if ((k + 1) % 8 == 0 || k + 1 == m) {
        Eigen::Matrix<Scalar, Eigen::Dynamic, 1> e1 =
            Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(k + 2);
        e1(0) = Scalar(beta);
        auto Hk = H.topLeftCorner(k + 2, k + 1);
        Eigen::Matrix<Scalar, Eigen::Dynamic, 1> y =
            Hk.colPivHouseholderQr().solve(e1);
        double rn = (Hk * y - e1).norm() / bnorm;
        if (rn <= tol) {
          ++k;
          break;
        }
      }
    }
    if (k == 0) break;
    auto Hk = H.topLeftCorner(k + 1, k);
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> e1 =
        Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(k + 1);
    e1(0) = Scalar(beta);
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> y = Hk.colPivHouseholderQr().solve(e1);
    x += V.leftCols(k) * y;

    Eigen::JacobiSVD<Mat> svd(Hk);
    double smax = svd.singularValues()(0);
    double smin = svd.singularValues()(svd.singularValues().size() - 1);
    cond = std::max(cond, smax / std::max(smin, 1e-300));
  }

  apply(x, w);
  rep.residual = (b - w).norm() / bnorm;
  rep.converged = rep.residual <= tol * 10;
  rep.iterations = total;
  rep.condition = cond;
  return rep;
}

}  // namespace dbar
