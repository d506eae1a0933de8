#pragma once

#include <vector>

#include "blitzws/types.hpp"

namespace blitzws {

/// Affine minorant of one piecewise term, anchored at the model's z:
///   x -> v + <g, x - z>.
/// With exact subgradients v equals the term's value at z; multiplier-based
/// constructions may give v strictly below it, which keeps the model a
/// valid lower bound.
struct TermAffine {
  int term = -1;
  SparseVec g;
  double v = 0.0;
};

/// 1-strongly convex lower bound on the relaxed objective f_t:
///   f_lb(x) = psi(z) + <g_psi, x - z> + 0.5 ||x - z||^2
///           + <collapsed_g, x> + collapsed_offset
///           + sum_k [ v_k + <g_k, x - z> ].
/// The collapsed part carries the assigned linear pieces in aggregate; the
/// per-term list carries working-set minorants.
class LowerBoundModel {
 public:
  Vector anchor;             // z
  Vector g_psi;              // element of d(psi)(z)
  double psi_at_anchor = 0;  // psi(z)
  Vector collapsed_g;        // sum of assigned linear-piece slopes (may be empty)
  double collapsed_offset = 0.0;
  std::vector<TermAffine> terms;

  /// z - (g_psi + collapsed_g + sum g_k); the unique minimizer.
  Vector minimizer() const;

  double value(const Vector& x) const;

  /// Model value at the anchor (the quadratic vanishes there).
  double value_at_anchor() const;

  /// value(minimizer()) = value_at_anchor - 0.5 ||total gradient||^2.
  double min_value() const;

  Vector total_gradient() const;

  /// Minorant of term i as (slope, value at anchor); defaults to zero for
  /// terms without a list entry.  Assigned-piece minorants folded into the
  /// collapsed part are not retrievable here; callers track assignments.
  const TermAffine* find_term(int i) const;
};

/// Spec-level alias for the minimizer of the certificate quadratic.
Vector minimize_lower_bound(const LowerBoundModel& lb);

}  // namespace blitzws
