#pragma once

#include <cstdint>
#include <memory>

#include "blitzws/lower_bound.hpp"
#include "blitzws/piecewise.hpp"
#include "blitzws/problems.hpp"

namespace blitzws {

struct SolverBudget {
  double eps_target = 0.0;  // epsilon_t in [0, 1)
  double wall_limit_s = kInfinity;
  int max_passes = 1000000;
};

struct SubproblemContext {
  const PiecewiseProblem* problem = nullptr;
  const Assignment* assignment = nullptr;
  const PiecewiseProblem::Collapsed* collapsed = nullptr;
  double gap_prev = 0.0;        // Delta_{t-1}
  double prev_lb_min = 0.0;     // f_{t-1}^LB(x_{t-1})
  const Vector* x_prev = nullptr;
  const Vector* feasible_seed = nullptr;  // y_{t-1}; finite full objective
};

struct SubproblemResult {
  Vector z;
  LowerBoundModel lb;
  Vector x;                    // minimizer of lb
  double f_t_at_z = 0.0;
  double subgap = 0.0;         // f_t(z) - lb.min_value()
  double achieved_eps = 0.0;   // subgap / gap_prev
  double dual_shortfall = 0.0; // max(0, 1 - dual progress ratio)
  bool conditions_met = false;
  bool budget_exhausted = false;
  int passes = 0;
};

/// Iterative solver for the relaxed subproblems; keeps warm-start state
/// across calls.  Deterministic: fixed cycle order, no randomness.
class SubproblemSolver {
 public:
  virtual ~SubproblemSolver() = default;

  /// Runs full passes until both termination conditions hold
  /// (f_t(z) - lb <= eps * gap_prev and the dual-progress bound) or the
  /// budget runs out.  Conditions are checked once per pass.
  virtual SubproblemResult solve(const SubproblemContext& ctx, const SolverBudget& budget) = 0;

  /// Current model-space iterate (omega, multipliers, or x for SVM).
  virtual Vector primal_model() const = 0;

  /// Cumulative coordinate-update work, in matrix nonzeros touched.
  std::int64_t work_nnz() const { return work_nnz_; }

 protected:
  std::int64_t work_nnz_ = 0;
};

/// Relaxed objective value using a precomputed collapse.
double relaxed_value(const PiecewiseProblem& problem, const PiecewiseProblem::Collapsed& c,
                     const Assignment& assignment, const Vector& x);

/// Fills lb.collapsed_* from the assigned pieces so the model covers the
/// out-of-working-set part of f_t exactly.
void attach_collapsed(LowerBoundModel& lb, const PiecewiseProblem::Collapsed& c);

std::unique_ptr<SubproblemSolver> make_min_norm_solver(const Instance& inst);
std::unique_ptr<SubproblemSolver> make_l1_solver(const Instance& inst);      // CD / prox-Newton
std::unique_ptr<SubproblemSolver> make_group_bcd_solver(const Instance& inst);
std::unique_ptr<SubproblemSolver> make_svm_dca_solver(const Instance& inst);

}  // namespace blitzws
