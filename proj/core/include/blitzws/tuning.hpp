#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "blitzws/types.hpp"

namespace blitzws {

/// Adaptive model for the per-iteration progress coefficient and subproblem
/// tolerance.  Iteration time is modeled as
///   T_hat(xi, eps) = C_setup + C_solve * ProblemSize(xi) / eps
/// and the gap after the iteration as
///   D_hat(xi, eps) = max{ (1 - (1 - eps) * xi * C_progress), eps } * gap.
/// The constants come from medians over recent per-iteration estimates.
class TuningModel {
 public:
  static constexpr int kXiGridSize = 125;
  static constexpr int kEpsGridSize = 10;
  static constexpr double kXiMin = 1e-6;
  static constexpr double kXiMax = 1.0;
  static constexpr double kEpsMin = 0.01;
  static constexpr double kEpsMax = 0.7;

  /// Log-spaced candidate grids, ascending.
  static const std::vector<double>& xi_grid();
  static const std::vector<double>& eps_grid();

  struct IterationSample {
    double t_setup = 0.0;
    double t_solve = 0.0;
    double eps_used = 0.0;        // requested tolerance epsilon_t
    std::int64_t problem_size = 0;
    double eps_hat = 0.0;         // achieved subproblem gap ratio
    double gap_ratio = 1.0;       // gap_t / gap_{t-1}
    double xi_used = 0.0;
  };

  void record(const IterationSample& s);

  int samples() const { return static_cast<int>(setup_history_.size()); }

  /// Median of the at most five most recent estimates.
  double c_setup() const;
  double c_solve() const;
  /// max(1, median of the at most two most recent estimates); 1 when empty.
  double c_progress() const;

  struct Choice {
    double xi = 1.0;
    double eps = 0.1;
    int xi_index = kXiGridSize - 1;
    int eps_index = 0;
  };

  /// Grid search maximizing -log(D_hat / gap) / T_hat given the problem
  /// size at each xi candidate (ascending grid order).
  Choice choose(const std::vector<std::int64_t>& problem_size_by_xi) const;

 private:
  std::deque<double> setup_history_;     // last 5
  std::deque<double> solve_history_;     // last 5
  std::deque<double> progress_history_;  // last 2
};

/// Median with the average-of-middle-two convention for even counts.
double median_of(std::vector<double> values);

}  // namespace blitzws
