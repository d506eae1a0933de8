#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "blitzws/capsule.hpp"
#include "blitzws/problems.hpp"
#include "blitzws/solvers.hpp"
#include "blitzws/tuning.hpp"

namespace blitzws {

struct EngineOptions {
  double rel_tol = 1e-8;
  int max_iterations = 1000;
  bool adaptive = true;         // xi_t / eps_t from the tuning model
  double fixed_xi = 0.5;        // used when adaptive == false
  double fixed_eps = 0.1;
  int max_passes_per_subproblem = 200000;
  double activity_tol = 1e-9;   // relative tolerance of the active-constraint rule
  int threads = 0;              // 0: from BLITZWS_THREADS, default 1
};

struct IterationRecord {
  int t = 0;
  double xi = 0.0;
  double eps = 0.0;           // requested tolerance
  double eps_hat = 0.0;       // achieved subproblem gap ratio
  double eps_effective = 0.0; // max(eps_hat, dual shortfall)
  double gap = 0.0;
  double full_objective = 0.0;  // f(y_t)
  int ws_size = 0;
  std::int64_t problem_size = 0;
  double t_setup = 0.0;
  double t_solve = 0.0;
  bool budget_exhausted = false;
};

struct EngineState {
  Vector x, y, z;
  double gap = 0.0;
  Assignment assignment;
  LowerBoundModel lb_model;
  int t = 0;
};

struct EngineResult {
  Vector y, x;
  double gap = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<IterationRecord> log;
};

/// Largest alpha in [0, 1] with y + alpha (z - y) feasible for every
/// constraint term and inside dom(psi); 1 when z is feasible.
double extreme_feasible_alpha(const PiecewiseProblem& problem, const Vector& y, const Vector& z);

/// Line search update of the feasible iterate along [y_prev, z]: the
/// extreme feasible point for pure-indicator problems, otherwise the 1-D
/// minimizer of f on the feasible part of the segment (parameter
/// tolerance 1e-10).
Vector line_search_y(const PiecewiseProblem& problem, const Vector& y_prev, const Vector& z);

/// Suboptimality gap f(y) - min f_lb; nonnegative up to roundoff.
double compute_gap(const PiecewiseProblem& problem, const Vector& y, const LowerBoundModel& lb);

/// The outer working-set loop: per-iteration parameter selection, capsule
/// construction, working-set selection, subproblem dispatch, and the line
/// search update of the feasible iterate.
class WorkingSetEngine {
 public:
  explicit WorkingSetEngine(const Instance& inst, EngineOptions opts = {});

  const EngineState& state() const { return state_; }
  const TuningModel& tuner() const { return tuner_; }
  SubproblemSolver& solver() { return *solver_; }
  bool converged() const { return converged_; }

  /// Working set for one capsule under the current state: the capsule
  /// containment condition, the lower-bound condition, the previous-model
  /// upper-bound condition, the nonlinearity rule, and the
  /// active-at-x_prev rule for constraint terms.
  Assignment select_working_set(const CapsuleParams& cap) const;

  IterationRecord run_iteration();

  using Callback = std::function<void(const IterationRecord&, const WorkingSetEngine&)>;
  EngineResult run(const Callback& cb = nullptr);

 private:
  struct GridSweep {
    std::vector<std::int64_t> ps_by_xi;
    std::vector<std::optional<CapsuleParams>> capsules;
  };
  GridSweep sweep_problem_sizes(const IterSnapshot& snap) const;
  bool term_in_working_set(int i, const CapsuleParams& cap, int* candidate_piece) const;
  bool c3_upper_bounds(int i, const Subfunction& candidate) const;

  const Instance& inst_;
  EngineOptions opts_;
  EngineState state_;
  TuningModel tuner_;
  std::unique_ptr<SubproblemSolver> solver_;
  Assignment prev_assignment_;
  double lb_min_monotone_ = 0.0;
  bool converged_ = false;
  int threads_ = 1;
};

}  // namespace blitzws
