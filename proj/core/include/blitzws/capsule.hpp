#pragma once

#include <optional>

#include "blitzws/piecewise.hpp"
#include "blitzws/types.hpp"

namespace blitzws {

/// Snapshot of the previous iteration used to build the equivalence region.
struct IterSnapshot {
  Vector x_prev;
  Vector y_prev;
  double gap_prev = 0.0;
  double dist = 0.0;  // ||x_prev - y_prev||, cached

  static IterSnapshot make(Vector x_prev, Vector y_prev, double gap_prev);
};

/// Capsule relaxation of the equivalence region: all points within
/// `radius` of the segment [c1, c2].
struct CapsuleParams {
  Vector c1;
  Vector c2;
  double radius = 0.0;
  double d_min = 0.0;
  double d_max = 0.0;

  double distance_to_segment(const Vector& p) const;
};

/// Radius of the equivalence ball at mixing weight beta.  Requires
/// beta in (0, 1/2) and xi in (0, 1].
double tau_xi(double beta, double xi, const IterSnapshot& snap);

/// Capsule parameters via three 1-D quasiconcave maximizations, each run
/// on the theta = beta / (1 - beta) reparameterization to interval width
/// 1e-12 (at most 200 shrink steps).  Returns nullopt when gap_prev is
/// nonpositive (converged; the region is undefined).
std::optional<CapsuleParams> compute_capsule(const IterSnapshot& snap, double xi);

// Containment and intersection primitives.  Strict inequalities follow the
// working-set and screening test definitions; boundary touches count as
// "not inside" / "not intersecting".

bool ball_inside_halfspace(const Vector& center, double radius, const SparseVec& a, double b);
bool ball_inside_ball(const Vector& center, double radius, const Vector& outer_center,
                      double outer_radius);
bool ball_inside_subdomain(const Vector& center, double radius, const Subdomain& dom);

/// True iff the capsule meets { x : <a, x> >= b }, evaluated as
/// b - max{<a,c1>, <a,c2>} < ||a|| * r.
bool capsule_intersects_halfspace_complement(const CapsuleParams& cap, const SparseVec& a,
                                             double b);

/// Both end balls pass the shape's containment test.
bool capsule_inside_subdomain(const CapsuleParams& cap, const Subdomain& dom);

}  // namespace blitzws
