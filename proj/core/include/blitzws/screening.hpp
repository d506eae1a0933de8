#pragma once

#include <utility>
#include <vector>

#include "blitzws/lower_bound.hpp"
#include "blitzws/problems.hpp"

namespace blitzws {

enum class SafeRegionKind { Blitz, GapSafe };

/// Ball certified to contain the minimizer.  The Blitz variant is centered
/// at the midpoint of (x0, y0) with radius sqrt(gap - ||x0 - y0||^2 / 4);
/// the gap-safe baseline is centered at y0 with radius sqrt(2 * gap).
struct SafeRegion {
  Vector center;
  double radius = 0.0;
  SafeRegionKind kind = SafeRegionKind::Blitz;

  static SafeRegion blitz(const Vector& x0, const Vector& y0, double gap0);
  static SafeRegion gap_safe(const Vector& y0, double gap0);
};

struct ScreenOutcome {
  /// Piece index fixed per term, or -1 to retain the full term.
  std::vector<int> fixed_piece;
  int screened_count = 0;

  bool screened(int i) const { return fixed_piece[i] >= 0; }
};

/// f0(x) = f(y0) + <g0, x - y0> + 0.5 ||x - y0||^2 from a subgradient of f
/// at y0, plus its minimizer x0 = y0 - g0.
std::pair<LowerBoundModel, Vector> build_lower_bound(const PiecewiseProblem& problem,
                                                     const Vector& y0, const Vector& g0);

/// Per-term safe fixing: term i is fixed to its piece at the region center
/// whenever the region fits inside that piece's subdomain.
ScreenOutcome blitz_screen(const PiecewiseProblem& problem, const SafeRegion& region);

/// The l1 specialization: x0 from the loss derivatives at the primal point,
/// y0 by scaling x0 into the feasible band, then the per-feature test
///   lambda - |<A_i, (x0 + y0)/2>| >= ||A_i|| * region radius.
/// Screened features are zero in every solution.
ScreenOutcome screen_l1(const Instance& inst, const Vector& omega0);

/// Applies the outcome: fixed terms collapse to their chosen piece.
PiecewiseProblem apply_screen(const PiecewiseProblem& problem, const ScreenOutcome& outcome,
                              const Vector& region_center);

}  // namespace blitzws
