#pragma once

#include <string>

#include "blitzws/types.hpp"

namespace blitzws {

/// Smooth losses with 1-strongly convex conjugates.  Each loss is 1-smooth
/// as parameterized here; the logistic loss carries a factor 4 for exactly
/// that reason.
enum class LossKind { Squared, Logistic, SquaredHinge, Huber };

std::string loss_kind_name(LossKind kind);
LossKind loss_kind_from_name(const std::string& name);

/// One scalar loss family; `s` is the Huber design parameter (ignored by
/// the other kinds).  `b` is the per-example label.
struct LossFunction {
  LossKind kind = LossKind::Squared;
  double s = 1.0;

  double value(double b, double u) const;
  double deriv(double b, double u) const;
  double second_deriv(double b, double u) const;

  /// Convex conjugate L*(x); +inf outside the conjugate domain.
  double conjugate(double b, double x) const;
  /// Derivative of the conjugate on the interior of its domain.
  double conjugate_deriv(double b, double x) const;
  /// Closed conjugate domain [lo, hi].
  void conjugate_domain(double b, double* lo, double* hi) const;

  /// True when labels must lie in {-1, +1}.
  bool classification() const {
    return kind == LossKind::Logistic || kind == LossKind::SquaredHinge;
  }
};

/// Brute-force conjugate sup_u { x*u - L(u) } by golden search over a wide
/// interval; the independent oracle for conjugate tests.
double conjugate_by_search(const LossFunction& loss, double b, double x, double u_span = 64.0);

/// Grid check of the logistic conjugate against the brute-force transform;
/// runs once per process and throws on failure.
void verify_logistic_conjugate();

}  // namespace blitzws
