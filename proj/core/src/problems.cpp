#include "blitzws/problems.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <set>

#include "blitzws/solvers.hpp"

namespace blitzws {

std::string task_name(TaskKind task) {
  switch (task) {
    case TaskKind::MinNorm: return "minnorm";
    case TaskKind::Lasso: return "lasso";
    case TaskKind::LogReg: return "logreg";
    case TaskKind::GroupLasso: return "grouplasso";
    case TaskKind::Svm: return "svm";
  }
  return "?";
}

TaskKind task_from_name(const std::string& name) {
  if (name == "minnorm") return TaskKind::MinNorm;
  if (name == "lasso") return TaskKind::Lasso;
  if (name == "logreg") return TaskKind::LogReg;
  if (name == "grouplasso") return TaskKind::GroupLasso;
  if (name == "svm") return TaskKind::Svm;
  throw UsageError("unknown task: " + name);
}

SeparableConjugatePsi::SeparableConjugatePsi(LossFunction loss, Vector labels)
    : loss_(loss), labels_(std::move(labels)) {
  int n = static_cast<int>(labels_.size());
  dom_lo_.resize(n);
  dom_hi_.resize(n);
  for (int j = 0; j < n; ++j) loss_.conjugate_domain(labels_[j], &dom_lo_[j], &dom_hi_[j]);
}

double SeparableConjugatePsi::value(const Vector& x) const {
  double v = 0.0;
  for (int j = 0; j < x.size(); ++j) {
    v += loss_.conjugate(labels_[j], x[j]);
    if (std::isinf(v)) return kInfinity;
  }
  return v;
}

Vector SeparableConjugatePsi::gradient(const Vector& x) const {
  Vector g(x.size());
  for (int j = 0; j < x.size(); ++j) g[j] = loss_.conjugate_deriv(labels_[j], x[j]);
  return g;
}

Vector SeparableConjugatePsi::argmin() const {
  Vector x(labels_.size());
  for (int j = 0; j < x.size(); ++j) x[j] = loss_.deriv(labels_[j], 0.0);
  return x;
}

double SeparableConjugatePsi::max_feasible_step(const Vector& y, const Vector& dir) const {
  double alpha = 1.0;
  for (int j = 0; j < y.size(); ++j) {
    if (dir[j] > 0.0 && std::isfinite(dom_hi_[j]))
      alpha = std::min(alpha, (dom_hi_[j] - y[j]) / dir[j]);
    else if (dir[j] < 0.0 && std::isfinite(dom_lo_[j]))
      alpha = std::min(alpha, (dom_lo_[j] - y[j]) / dir[j]);
  }
  return std::max(alpha, 0.0);
}

namespace {

PiecewiseTerm make_constraint_term(const SparseVec& a, double b) {
  Piece feasible{ZeroPiece{}, HalfSpace{a, b}, true};
  SparseVec neg_a = SparseVec::scaled(a, -1.0);
  Piece violated{IndicatorZeroPiece{HalfSpace{a, b}}, HalfSpace{neg_a, -b}, true};
  return PiecewiseTerm({std::move(feasible), std::move(violated)}, a.nnz());
}

/// |<A_col, x>| <= lambda as a three-subdomain term: the feasible band and
/// the two violating half-spaces.  Equality constraints (lambda = 0, used
/// for the unregularized bias) get a roundoff allowance.
PiecewiseTerm make_band_term(const SparseColumnMatrix* mat, int col, double lambda) {
  double eps = lambda == 0.0 ? 1e-9 * std::sqrt(static_cast<double>(mat->rows())) : 0.0;
  GroupNormCap band{mat, {col}, lambda, mat->col_norm(col), eps};
  const SparseVec& a = mat->col(col);
  SparseVec neg_a = SparseVec::scaled(a, -1.0);
  Piece inside{ZeroPiece{}, band, true};
  Piece upper{IndicatorZeroPiece{band}, HalfSpace{neg_a, -lambda}, true};
  Piece lower{IndicatorZeroPiece{band}, HalfSpace{a, -lambda}, true};
  return PiecewiseTerm({std::move(inside), std::move(upper), std::move(lower)}, a.nnz());
}

PiecewiseTerm make_group_term(const SparseColumnMatrix* mat, std::vector<int> cols,
                              double lambda) {
  // Column-disjoint supports give the exact operator norm max_k ||A_k||;
  // otherwise fall back to the always-valid Frobenius bound.
  std::set<Index> seen;
  bool disjoint = true;
  double max_norm = 0.0, sq_sum = 0.0;
  int nnz = 0;
  for (int c : cols) {
    max_norm = std::max(max_norm, mat->col_norm(c));
    sq_sum += mat->col_squared_norm(c);
    nnz += mat->col_nnz(c);
    for (Index r : mat->col(c).idx) {
      if (!seen.insert(r).second) disjoint = false;
    }
  }
  double lipschitz = disjoint ? max_norm : std::sqrt(sq_sum);
  GroupNormCap cap{mat, std::move(cols), lambda, lipschitz};
  Piece inside{ZeroPiece{}, cap, true};
  Piece outside{IndicatorZeroPiece{cap}, AllSpace{}, true};
  return PiecewiseTerm({std::move(inside), std::move(outside)}, nnz);
}

PiecewiseTerm make_hinge_term(const SparseVec& a, double b, double C) {
  SparseVec ba = SparseVec::scaled(a, b);
  SparseVec neg_ba = SparseVec::scaled(a, -b);
  SparseVec loss_grad = SparseVec::scaled(a, -C * b);
  Piece loss{LinearPiece{std::move(loss_grad), C}, HalfSpace{ba, 1.0}, true};
  Piece flat{ZeroPiece{}, HalfSpace{neg_ba, -1.0}, true};
  return PiecewiseTerm({std::move(loss), std::move(flat)}, a.nnz());
}

std::shared_ptr<SparseColumnMatrix> make_ones_column(int n) {
  SparseVec ones;
  for (int j = 0; j < n; ++j) ones.push_back(j, 1.0);
  return std::make_shared<SparseColumnMatrix>(n, std::vector<SparseVec>{std::move(ones)});
}

void check_classification_labels(const Vector& labels) {
  for (int j = 0; j < labels.size(); ++j) {
    if (labels[j] != 1.0 && labels[j] != -1.0)
      throw UsageError("labels must be in {-1, +1} for this loss");
  }
}

}  // namespace

int Instance::feature_count() const {
  switch (task) {
    case TaskKind::Lasso:
    case TaskKind::LogReg:
    case TaskKind::GroupLasso:
      return A->cols();
    default:
      return 0;
  }
}

int Instance::model_dim() const {
  switch (task) {
    case TaskKind::Lasso:
    case TaskKind::LogReg:
    case TaskKind::GroupLasso:
      return feature_count() + (bias ? 1 : 0);
    default:
      return dual_dim();
  }
}

Vector Instance::initial_feasible() const {
  Vector y0 = Vector::Zero(dual_dim());
  if (!std::isfinite(problem->evaluate_full(y0)))
    throw UsageError("zero vector is not feasible for this instance");
  return y0;
}

LowerBoundModel Instance::initial_lower_bound() const {
  LowerBoundModel lb;
  lb.anchor = problem->psi().argmin();
  lb.psi_at_anchor = problem->psi().value(lb.anchor);
  lb.g_psi = Vector::Zero(dual_dim());
  return lb;
}

std::unique_ptr<SubproblemSolver> Instance::make_solver() const {
  switch (task) {
    case TaskKind::MinNorm: return make_min_norm_solver(*this);
    case TaskKind::Lasso:
    case TaskKind::LogReg: return make_l1_solver(*this);
    case TaskKind::GroupLasso: return make_group_bcd_solver(*this);
    case TaskKind::Svm: return make_svm_dca_solver(*this);
  }
  throw UsageError("no solver for task");
}

Vector Instance::predictions(const Vector& omega) const {
  Vector pred = Vector::Zero(A->rows());
  int nf = feature_count();
  for (int i = 0; i < nf; ++i) {
    if (omega[i] != 0.0) A->col(i).add_to(omega[i], pred);
  }
  if (bias) pred.array() += omega[nf];
  return pred;
}

double Instance::primal_objective(const Vector& omega) const {
  int nf = feature_count();
  Vector pred = predictions(omega);
  double v = 0.0;
  for (int j = 0; j < pred.size(); ++j) v += loss.value(labels[j], pred[j]);
  if (task == TaskKind::GroupLasso) {
    for (const auto& g : groups) {
      double s = 0.0;
      for (int c : g) s += omega[c] * omega[c];
      v += lambda * std::sqrt(s);
    }
  } else {
    for (int i = 0; i < nf; ++i) v += lambda * std::abs(omega[i]);
  }
  return v;
}

double Instance::metric_objective(const Vector& model) const {
  switch (task) {
    case TaskKind::Lasso:
    case TaskKind::LogReg:
    case TaskKind::GroupLasso:
      return primal_objective(model);
    case TaskKind::Svm:
    case TaskKind::MinNorm:
      return problem->evaluate_full(model);
  }
  return 0.0;
}

Vector Instance::dual_from_primal(const Vector& omega) const {
  Vector pred = predictions(omega);
  Vector x(pred.size());
  for (int j = 0; j < pred.size(); ++j) x[j] = loss.deriv(labels[j], pred[j]);
  return x;
}

Vector Instance::primal_from_dual(const Vector& x, double active_tol) const {
  if (task == TaskKind::Svm || task == TaskKind::MinNorm) return x;
  int nf = feature_count();
  std::vector<int> active;
  if (task == TaskKind::GroupLasso) {
    for (std::size_t g = 0; g < groups.size(); ++g) {
      double s = 0.0;
      for (int c : groups[g]) {
        double d = A->col(c).dot(x);
        s += d * d;
      }
      if (std::sqrt(s) >= lambda * (1.0 - active_tol)) {
        for (int c : groups[g]) active.push_back(c);
      }
    }
  } else {
    for (int i = 0; i < nf; ++i) {
      if (std::abs(A->col(i).dot(x)) >= lambda * (1.0 - active_tol)) active.push_back(i);
    }
  }

  // Recover predictions from the dual point, then solve the least-squares
  // system over the active columns.
  int n = A->rows();
  Vector target(n);
  for (int j = 0; j < n; ++j) target[j] = loss.conjugate_deriv(labels[j], x[j]);

  int cols = static_cast<int>(active.size()) + (bias ? 1 : 0);
  Vector omega = Vector::Zero(model_dim());
  if (cols == 0) return omega;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, cols);
  for (std::size_t k = 0; k < active.size(); ++k) {
    const SparseVec& col = A->col(active[k]);
    for (int t = 0; t < col.nnz(); ++t) M(col.idx[t], static_cast<int>(k)) = col.val[t];
  }
  if (bias) M.col(cols - 1).setOnes();
  Vector sol = M.colPivHouseholderQr().solve(target);
  for (std::size_t k = 0; k < active.size(); ++k) omega[active[k]] = sol[static_cast<int>(k)];
  if (bias) omega[nf] = sol[cols - 1];
  return omega;
}

Instance build_l1_dual(std::shared_ptr<SparseColumnMatrix> features, Vector labels,
                       LossKind loss_kind, double lambda, L1DualOptions opts, double huber_s) {
  if (lambda <= 0.0) throw UsageError("build_l1_dual: lambda must be positive");
  LossFunction loss{loss_kind, huber_s};
  if (loss.classification()) check_classification_labels(labels);
  if (loss_kind == LossKind::Logistic) verify_logistic_conjugate();

  int n = features->rows();
  if (static_cast<int>(labels.size()) != n)
    throw UsageError("build_l1_dual: label count must match example count");

  Instance inst;
  inst.task = loss_kind == LossKind::Logistic ? TaskKind::LogReg : TaskKind::Lasso;
  inst.A = std::move(features);
  inst.labels = labels;
  inst.loss = loss;
  inst.lambda = lambda;
  inst.bias = opts.add_bias;

  std::shared_ptr<const StronglyConvex> psi;
  if (loss_kind == LossKind::Squared) {
    psi = std::make_shared<QuadraticPsi>(-labels, -0.5 * labels.squaredNorm());
  } else {
    psi = std::make_shared<SeparableConjugatePsi>(loss, labels);
  }

  std::vector<PiecewiseTerm> terms;
  terms.reserve(inst.A->cols() + 1);
  for (int i = 0; i < inst.A->cols(); ++i) terms.push_back(make_band_term(inst.A.get(), i, lambda));
  if (opts.add_bias) {
    inst.aux = make_ones_column(n);
    terms.push_back(make_band_term(inst.aux.get(), 0, 0.0));
  }
  inst.problem = std::make_shared<PiecewiseProblem>(psi, std::move(terms));
  inst.problem->retain(inst.A);
  if (inst.aux) inst.problem->retain(inst.aux);
  return inst;
}

double compute_lambda_max(const SparseColumnMatrix& features, const Vector& labels,
                          const LossFunction& loss) {
  Vector x0(labels.size());
  for (int j = 0; j < labels.size(); ++j) x0[j] = loss.deriv(labels[j], 0.0);
  double best = 0.0;
  for (int i = 0; i < features.cols(); ++i)
    best = std::max(best, std::abs(features.col(i).dot(x0)));
  return best;
}

Instance build_group_dual(std::shared_ptr<SparseColumnMatrix> features, Vector labels,
                          std::vector<std::vector<int>> groups, double lambda,
                          GroupDualOptions opts) {
  if (lambda <= 0.0) throw UsageError("build_group_dual: lambda must be positive");
  int n = features->rows();
  std::vector<bool> covered(features->cols(), false);
  for (const auto& g : groups) {
    if (g.empty()) throw UsageError("build_group_dual: empty group");
    for (int c : g) {
      if (c < 0 || c >= features->cols() || covered[c])
        throw UsageError("build_group_dual: groups must partition the features");
      covered[c] = true;
    }
  }
  for (bool c : covered)
    if (!c) throw UsageError("build_group_dual: groups must cover all features");

  if (opts.standardize_groups) {
    for (const auto& g : groups) {
      double var_sum = 0.0;
      for (int c : g) {
        const SparseVec& col = features->col(c);
        double s1 = 0.0, s2 = 0.0;
        for (double v : col.val) {
          s1 += v;
          s2 += v * v;
        }
        var_sum += (s2 - s1 * s1 / n) / n;
      }
      if (var_sum > 0.0) {
        double scale = 1.0 / std::sqrt(var_sum);
        for (int c : g) features->scale_col(c, scale);
      }
    }
  }

  Instance inst;
  inst.task = TaskKind::GroupLasso;
  inst.A = std::move(features);
  inst.labels = labels;
  inst.loss = LossFunction{LossKind::Squared};
  inst.lambda = lambda;
  inst.bias = opts.add_bias;
  inst.groups = groups;

  auto psi = std::make_shared<QuadraticPsi>(-labels, -0.5 * labels.squaredNorm());
  std::vector<PiecewiseTerm> terms;
  terms.reserve(groups.size() + 1);
  for (auto& g : groups) terms.push_back(make_group_term(inst.A.get(), g, lambda));
  if (opts.add_bias) {
    inst.aux = make_ones_column(n);
    terms.push_back(make_band_term(inst.aux.get(), 0, 0.0));
  }
  inst.problem = std::make_shared<PiecewiseProblem>(psi, std::move(terms));
  inst.problem->retain(inst.A);
  if (inst.aux) inst.problem->retain(inst.aux);
  return inst;
}

Instance build_svm_primal(std::shared_ptr<SparseColumnMatrix> examples, Vector labels, double C) {
  if (C <= 0.0) throw UsageError("build_svm_primal: C must be positive");
  check_classification_labels(labels);
  if (static_cast<int>(labels.size()) != examples->cols())
    throw UsageError("build_svm_primal: one label per example column required");

  Instance inst;
  inst.task = TaskKind::Svm;
  inst.A = std::move(examples);
  inst.labels = labels;
  inst.lambda = C;

  auto psi = std::make_shared<QuadraticPsi>(Vector::Zero(inst.A->rows()));
  std::vector<PiecewiseTerm> terms;
  terms.reserve(inst.A->cols());
  for (int i = 0; i < inst.A->cols(); ++i)
    terms.push_back(make_hinge_term(inst.A->col(i), labels[i], C));
  inst.problem = std::make_shared<PiecewiseProblem>(psi, std::move(terms));
  inst.problem->retain(inst.A);
  return inst;
}

Instance build_min_norm(std::shared_ptr<SparseColumnMatrix> constraints, Vector rhs) {
  if (static_cast<int>(rhs.size()) != constraints->cols())
    throw UsageError("build_min_norm: one rhs entry per constraint column required");
  Instance inst;
  inst.task = TaskKind::MinNorm;
  inst.A = std::move(constraints);
  inst.labels = rhs;

  auto psi = std::make_shared<QuadraticPsi>(Vector::Zero(inst.A->rows()));
  std::vector<PiecewiseTerm> terms;
  terms.reserve(inst.A->cols());
  for (int i = 0; i < inst.A->cols(); ++i)
    terms.push_back(make_constraint_term(inst.A->col(i), rhs[i]));
  inst.problem = std::make_shared<PiecewiseProblem>(psi, std::move(terms));
  inst.problem->retain(inst.A);
  return inst;
}

SparseColumnMatrix transpose(const SparseColumnMatrix& m) {
  std::vector<SparseVec> rows(m.rows());
  for (int j = 0; j < m.cols(); ++j) {
    const SparseVec& col = m.col(j);
    for (int t = 0; t < col.nnz(); ++t) rows[col.idx[t]].push_back(j, col.val[t]);
  }
  return SparseColumnMatrix(m.cols(), std::move(rows));
}

}  // namespace blitzws
