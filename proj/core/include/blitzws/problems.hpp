#pragma once

#include <memory>
#include <string>
#include <vector>

#include "blitzws/losses.hpp"
#include "blitzws/lower_bound.hpp"
#include "blitzws/piecewise.hpp"

namespace blitzws {

enum class TaskKind { MinNorm, Lasso, LogReg, GroupLasso, Svm };

std::string task_name(TaskKind task);
TaskKind task_from_name(const std::string& name);

/// psi(x) = sum_j L_j^*(x_j); 1-strongly convex since each loss is 1-smooth.
class SeparableConjugatePsi final : public StronglyConvex {
 public:
  SeparableConjugatePsi(LossFunction loss, Vector labels);

  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  Vector argmin() const override;
  int dim() const override { return static_cast<int>(labels_.size()); }
  double max_feasible_step(const Vector& y, const Vector& dir) const override;

  const LossFunction& loss() const { return loss_; }
  const Vector& labels() const { return labels_; }

 private:
  LossFunction loss_;
  Vector labels_;
  Vector dom_lo_, dom_hi_;
};

class SubproblemSolver;  // solvers.hpp

/// A built problem instance: the piecewise objective plus the task data
/// needed by subproblem solvers, converters, and benchmark metrics.
///
/// Column semantics of `A` by task:
///   MinNorm            constraint vectors a_i
///   Lasso / LogReg     feature columns A_i over examples
///   GroupLasso         feature columns, partitioned by `groups`
///   Svm                training examples a_i over the feature space
struct Instance {
  TaskKind task = TaskKind::MinNorm;
  std::shared_ptr<SparseColumnMatrix> A;
  std::shared_ptr<SparseColumnMatrix> aux;  // bias column of ones, when present
  Vector labels;
  LossFunction loss;
  double lambda = 0.0;  // lambda, or C for SVM
  bool bias = false;
  std::vector<std::vector<int>> groups;
  std::shared_ptr<PiecewiseProblem> problem;

  int dual_dim() const { return problem->dim(); }
  int feature_count() const;

  Vector initial_feasible() const;        // y_0
  LowerBoundModel initial_lower_bound() const;  // f_0 certificate; x_0 = its minimizer
  std::unique_ptr<SubproblemSolver> make_solver() const;

  /// Objective the benchmarks report: the ML-side objective for the dual
  /// formulations, f itself for SVM and min-norm.
  double metric_objective(const Vector& model) const;

  /// Model-space dimension of metric_objective's argument.
  int model_dim() const;

  // Primal/dual converters for the dual formulations.
  Vector dual_from_primal(const Vector& omega) const;
  Vector primal_from_dual(const Vector& x, double active_tol = 1e-6) const;

  double primal_objective(const Vector& omega) const;
  Vector predictions(const Vector& omega) const;  // A * omega (+ bias)
};

struct L1DualOptions {
  bool add_bias = false;
};

/// Dual of l1-regularized smooth-loss minimization: psi from the loss
/// conjugates, one two-sided band constraint per feature.
Instance build_l1_dual(std::shared_ptr<SparseColumnMatrix> features, Vector labels,
                       LossKind loss_kind, double lambda, L1DualOptions opts = {},
                       double huber_s = 1.0);

/// Smallest regularization weight with an all-zero primal solution.
double compute_lambda_max(const SparseColumnMatrix& features, const Vector& labels,
                          const LossFunction& loss);

struct GroupDualOptions {
  bool add_bias = false;
  bool standardize_groups = true;
};

/// Dual of the group lasso; one norm-cap constraint per group.  Group
/// columns are rescaled so per-group column variances sum to one unless
/// disabled.
Instance build_group_dual(std::shared_ptr<SparseColumnMatrix> features, Vector labels,
                          std::vector<std::vector<int>> groups, double lambda,
                          GroupDualOptions opts = {});

/// SVM primal with hinge loss; one piecewise loss term per example.
Instance build_svm_primal(std::shared_ptr<SparseColumnMatrix> examples, Vector labels, double C);

/// Min-norm point subject to linear inequalities.
Instance build_min_norm(std::shared_ptr<SparseColumnMatrix> constraints, Vector rhs);

/// Transposes a column matrix (features-by-examples <-> examples-by-features).
SparseColumnMatrix transpose(const SparseColumnMatrix& m);

}  // namespace blitzws
