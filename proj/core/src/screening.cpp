#include "blitzws/screening.hpp"

#include <algorithm>
#include <cmath>

#include "blitzws/capsule.hpp"

namespace blitzws {

SafeRegion SafeRegion::blitz(const Vector& x0, const Vector& y0, double gap0) {
  SafeRegion r;
  r.kind = SafeRegionKind::Blitz;
  r.center = 0.5 * (x0 + y0);
  double rr = gap0 - 0.25 * (x0 - y0).squaredNorm();
  r.radius = std::sqrt(std::max(rr, 0.0));
  return r;
}

SafeRegion SafeRegion::gap_safe(const Vector& y0, double gap0) {
  SafeRegion r;
  r.kind = SafeRegionKind::GapSafe;
  r.center = y0;
  r.radius = std::sqrt(std::max(2.0 * gap0, 0.0));
  return r;
}

std::pair<LowerBoundModel, Vector> build_lower_bound(const PiecewiseProblem& problem,
                                                     const Vector& y0, const Vector& g0) {
  double fy = problem.evaluate_full(y0);
  if (!std::isfinite(fy)) throw UsageError("build_lower_bound: f(y0) must be finite");
  LowerBoundModel lb;
  lb.anchor = y0;
  lb.g_psi = g0;
  lb.psi_at_anchor = fy;
  return {lb, Vector(y0 - g0)};
}

ScreenOutcome blitz_screen(const PiecewiseProblem& problem, const SafeRegion& region) {
  ScreenOutcome out;
  out.fixed_piece.assign(problem.term_count(), -1);
  for (int i = 0; i < problem.term_count(); ++i) {
    const PiecewiseTerm& term = problem.term(i);
    int k = term.partition(region.center);
    if (ball_inside_subdomain(region.center, region.radius, term.piece(k).dom)) {
      out.fixed_piece[i] = k;
      ++out.screened_count;
    }
  }
  return out;
}

ScreenOutcome screen_l1(const Instance& inst, const Vector& omega0) {
  if (inst.task != TaskKind::Lasso && inst.task != TaskKind::LogReg)
    throw UsageError("screen_l1: instance must be an l1-regularized dual");
  const SparseColumnMatrix& A = *inst.A;
  int nf = inst.feature_count();
  int m = inst.problem->term_count();

  Vector x0 = inst.dual_from_primal(omega0);

  ScreenOutcome out;
  out.fixed_piece.assign(m, -1);

  // Feasible y0 by scaling x0 into the constraint band (centered first when
  // the instance carries the zero-sum bias constraint).
  Vector dir = x0;
  if (inst.bias) dir.array() -= dir.mean();
  double max_dot = 0.0;
  for (int i = 0; i < nf; ++i) max_dot = std::max(max_dot, std::abs(A.col(i).dot(dir)));
  if (max_dot == 0.0) {
    // Degenerate direction: the dual solution is the unconstrained
    // minimizer, every feature screens out.
    for (int i = 0; i < nf; ++i) out.fixed_piece[i] = 0;
    out.screened_count = nf;
    return out;
  }
  // The scale lands the binding band exactly on its boundary; shrink by a
  // hair so the scaled point stays feasible under roundoff.
  double s = std::min(1.0, inst.lambda / max_dot) * (1.0 - 1e-12);
  Vector y0 = s * dir;

  double gap0 = inst.problem->evaluate_full(y0) + inst.primal_objective(omega0);
  double rr = gap0 - 0.25 * (x0 - y0).squaredNorm();
  double radius = std::sqrt(std::max(rr, 0.0));
  Vector mid = 0.5 * (x0 + y0);

  for (int i = 0; i < nf; ++i) {
    if (inst.lambda - std::abs(A.col(i).dot(mid)) >= A.col_norm(i) * radius) {
      out.fixed_piece[i] = 0;  // the zero piece of the band term
      ++out.screened_count;
    }
  }
  return out;
}

PiecewiseProblem apply_screen(const PiecewiseProblem& problem, const ScreenOutcome& outcome,
                              const Vector& region_center) {
  std::vector<bool> keep(problem.term_count());
  for (int i = 0; i < problem.term_count(); ++i) keep[i] = !outcome.screened(i);
  return problem.reduce_at_solution(region_center, keep);
}

}  // namespace blitzws
