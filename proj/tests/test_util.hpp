#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <memory>
#include <vector>

#include "blitzws/fixtures.hpp"
#include "blitzws/problems.hpp"

namespace blitzws::testutil {

inline SparseColumnMatrix random_sparse_matrix(Rng& rng, int n, int m, double density) {
  std::vector<SparseVec> cols(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      if (rng.uniform() < density) cols[i].push_back(j, rng.gaussian());
    }
    if (cols[i].empty()) cols[i].push_back(rng.uniform_int(n), rng.gaussian());
  }
  return SparseColumnMatrix(n, std::move(cols));
}

/// Random feasible-at-zero min-norm instance (all rhs positive).
inline Instance random_min_norm(Rng& rng, int n, int m) {
  auto A = std::make_shared<SparseColumnMatrix>(random_sparse_matrix(rng, n, m, 0.5));
  Vector b(m);
  for (int i = 0; i < m; ++i) b[i] = rng.uniform(0.05, 1.0);
  return build_min_norm(A, b);
}

inline Eigen::MatrixXd to_dense(const SparseColumnMatrix& m) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m.rows(), m.cols());
  for (int i = 0; i < m.cols(); ++i) {
    const SparseVec& c = m.col(i);
    for (int t = 0; t < c.nnz(); ++t) out(c.idx[t], i) = c.val[t];
  }
  return out;
}

/// Dykstra's alternating projections: the projection of `z0` onto the
/// intersection of the half-spaces <a_i, x> <= b_i.  Independent oracle for
/// min-norm solutions (z0 = 0).
inline Vector dykstra_project(const SparseColumnMatrix& A, const Vector& b, const Vector& z0,
                              int sweeps = 20000) {
  int m = A.cols();
  Vector x = z0;
  std::vector<Vector> inc(m, Vector::Zero(z0.size()));
  for (int s = 0; s < sweeps; ++s) {
    double moved = 0.0;
    for (int i = 0; i < m; ++i) {
      Vector y = x + inc[i];
      double viol = A.col(i).dot(y) - b[i];
      Vector proj = y;
      if (viol > 0.0) {
        double sq = A.col(i).squared_norm();
        proj = y;
        A.col(i).add_to(-viol / sq, proj);
      }
      inc[i] = y - proj;
      moved += (proj - x).squaredNorm();
      x = proj;
    }
    if (moved < 1e-26) break;
  }
  return x;
}

/// FISTA on the l1-regularized smooth-loss primal; independent oracle for
/// lasso-type solutions at small scale.
inline Vector fista_l1(const Eigen::MatrixXd& A, const Vector& labels, const LossFunction& loss,
                       double lambda, int iters = 50000) {
  int m = static_cast<int>(A.cols());
  Vector w = Vector::Zero(m), v = w, w_prev = w;
  double L = (A.transpose() * A).operatorNorm();  // loss is 1-smooth in predictions
  L = std::max(L, 1e-12);
  double tk = 1.0;
  for (int it = 0; it < iters; ++it) {
    Vector pred = A * v;
    Vector g(pred.size());
    for (int j = 0; j < pred.size(); ++j) g[j] = loss.deriv(labels[j], pred[j]);
    Vector grad = A.transpose() * g;
    Vector u = v - grad / L;
    w_prev = w;
    for (int i = 0; i < m; ++i) {
      double t = lambda / L;
      w[i] = u[i] > t ? u[i] - t : (u[i] < -t ? u[i] + t : 0.0);
    }
    double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
    v = w + ((tk - 1.0) / t_next) * (w - w_prev);
    tk = t_next;
  }
  return w;
}

template <typename F>
double golden_min(F f, double lo, double hi, int iters = 200) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - invphi * (hi - lo);
  double x2 = lo + invphi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 > f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = f(x1);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace blitzws::testutil
