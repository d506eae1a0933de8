#include "blitzws/capsule.hpp"

#include <algorithm>
#include <cmath>

namespace blitzws {

namespace {

constexpr double kThetaTol = 1e-12;
constexpr int kMaxShrinkSteps = 200;
constexpr int kScanPoints = 129;

double theta_from_beta(double beta) { return beta / (1.0 - beta); }
double beta_from_theta(double theta) { return theta / (1.0 + theta); }

/// Bracket term of tau in theta coordinates:
///   1 + theta * c - (1 - xi) * (1 + theta) / (1 - theta),
/// where c = 1 - d^2 / (2 * gap).  Concave in theta on (0, 1).
struct TauBracket {
  double c;
  double xi;

  double operator()(double theta) const {
    return 1.0 + theta * c - (1.0 - xi) * (1.0 + theta) / (1.0 - theta);
  }
};

/// Maximizes a unimodal function on [lo, hi]: a coarse scan brackets the
/// peak, then golden-section bisection narrows it to kThetaTol.
template <typename F>
double maximize_unimodal(F f, double lo, double hi) {
  double best_t = lo, best_v = f(lo);
  int best_i = 0;
  for (int i = 1; i < kScanPoints; ++i) {
    double t = lo + (hi - lo) * i / (kScanPoints - 1.0);
    double v = f(t);
    if (v > best_v) {
      best_v = v;
      best_t = t;
      best_i = i;
    }
  }
  double a = lo + (hi - lo) * std::max(0, best_i - 1) / (kScanPoints - 1.0);
  double b = lo + (hi - lo) * std::min(kScanPoints - 1, best_i + 1) / (kScanPoints - 1.0);

  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < kMaxShrinkSteps && (b - a) > kThetaTol; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    }
  }
  double mid = 0.5 * (a + b);
  double fm = f(mid);
  if (best_v > fm) return best_t;  // guards against flat plateaus near endpoints
  return mid;
}

}  // namespace

IterSnapshot IterSnapshot::make(Vector x_prev, Vector y_prev, double gap_prev) {
  IterSnapshot s;
  s.dist = (x_prev - y_prev).norm();
  s.x_prev = std::move(x_prev);
  s.y_prev = std::move(y_prev);
  s.gap_prev = gap_prev;
  if (gap_prev > 0.0 && s.dist * s.dist > 2.0 * gap_prev * (1.0 + 1e-9))
    throw UsageError("IterSnapshot: ||x - y||^2 exceeds 2 * gap; invalid certificate");
  return s;
}

double tau_xi(double beta, double xi, const IterSnapshot& snap) {
  if (!(beta > 0.0 && beta < 0.5)) throw UsageError("tau_xi: beta must lie in (0, 1/2)");
  if (!(xi > 0.0 && xi <= 1.0)) throw UsageError("tau_xi: xi must lie in (0, 1]");
  double two_gap = 2.0 * snap.gap_prev;
  double c = 1.0 - snap.dist * snap.dist / two_gap;
  c = std::max(c, 0.0);
  double bracket = 1.0 + beta / (1.0 - beta) * c - (1.0 - xi) / (1.0 - 2.0 * beta);
  if (bracket <= 0.0) return 0.0;
  return beta * std::sqrt(two_gap) * std::sqrt(bracket);
}

std::optional<CapsuleParams> compute_capsule(const IterSnapshot& snap, double xi) {
  if (!(xi > 0.0 && xi <= 1.0)) throw UsageError("compute_capsule: xi must lie in (0, 1]");
  if (!(snap.gap_prev > 0.0)) return std::nullopt;

  const double d = snap.dist;
  const double sqrt_two_gap = std::sqrt(2.0 * snap.gap_prev);
  double c = 1.0 - d * d / (2.0 * snap.gap_prev);
  c = std::max(c, 0.0);
  TauBracket bracket{c, xi};

  // Positivity interval of tau in theta coordinates: (0, theta_max).
  double theta_hi = theta_from_beta(0.5 - 1e-12);
  double theta_max;
  if (xi >= 1.0) {
    theta_max = theta_hi;
  } else {
    // bracket(0+) = xi > 0 and bracket -> -inf as theta -> 1; sign bisection.
    double lo = 0.0, hi = theta_hi;
    if (bracket(hi) > 0.0) {
      theta_max = hi;
    } else {
      for (int it = 0; it < kMaxShrinkSteps && (hi - lo) > kThetaTol; ++it) {
        double mid = 0.5 * (lo + hi);
        (bracket(mid) > 0.0 ? lo : hi) = mid;
      }
      theta_max = lo;
    }
  }
  if (theta_max <= kThetaTol) return std::nullopt;

  auto tau_theta = [&](double theta) {
    double b = bracket(theta);
    if (b <= 0.0) return 0.0;
    return beta_from_theta(theta) * sqrt_two_gap * std::sqrt(b);
  };
  auto q = [&](double theta, double s) {
    return s * beta_from_theta(theta) * d + tau_theta(theta);
  };

  double eps = kThetaTol;
  double lo = eps, hi = theta_max - eps;
  if (hi <= lo) hi = theta_max;

  double t_r = maximize_unimodal([&](double t) { return q(t, 0.0); }, lo, hi);
  double radius = q(t_r, 0.0);
  double t_max = maximize_unimodal([&](double t) { return q(t, +1.0); }, lo, hi);
  double d_max = q(t_max, +1.0);
  double t_min = maximize_unimodal([&](double t) { return q(t, -1.0); }, lo, hi);
  // d_min = inf (beta d - tau) = -sup (tau - beta d); the infimum approaches
  // 0 at beta -> 0 when tau never exceeds beta d.
  double d_min = -std::max(q(t_min, -1.0), 0.0);

  CapsuleParams cap;
  cap.radius = radius;
  cap.d_min = d_min;
  cap.d_max = d_max;
  Vector unit = Vector::Zero(snap.x_prev.size());
  if (d > 0.0) unit = (snap.x_prev - snap.y_prev) / d;
  cap.c1 = snap.y_prev + unit * (d_min + radius);
  cap.c2 = snap.y_prev + unit * (d_max - radius);
  return cap;
}

double CapsuleParams::distance_to_segment(const Vector& p) const {
  Vector seg = c2 - c1;
  double len2 = seg.squaredNorm();
  if (len2 <= 0.0) return (p - c1).norm();
  double t = std::clamp((p - c1).dot(seg) / len2, 0.0, 1.0);
  return (p - (c1 + t * seg)).norm();
}

bool ball_inside_halfspace(const Vector& center, double radius, const SparseVec& a, double b) {
  return a.dot(center) - b < -a.norm() * radius;
}

bool ball_inside_ball(const Vector& center, double radius, const Vector& outer_center,
                      double outer_radius) {
  return (outer_center - center).norm() + radius < outer_radius;
}

bool ball_inside_subdomain(const Vector& center, double radius, const Subdomain& dom) {
  if (const auto* hs = std::get_if<HalfSpace>(&dom)) {
    return ball_inside_halfspace(center, radius, hs->a, hs->b);
  }
  if (const auto* ball = std::get_if<BallRegion>(&dom)) {
    return ball_inside_ball(center, radius, ball->center, ball->radius);
  }
  if (const auto* cap = std::get_if<GroupNormCap>(&dom)) {
    return cap->group_norm(center) + cap->lipschitz * radius <= cap->lambda + cap->eps;
  }
  if (std::holds_alternative<AllSpace>(dom)) return true;
  throw UsageError("ball_inside_subdomain: unsupported shape");
}

bool capsule_intersects_halfspace_complement(const CapsuleParams& cap, const SparseVec& a,
                                             double b) {
  double proj = std::max(a.dot(cap.c1), a.dot(cap.c2));
  return b - proj < a.norm() * cap.radius;
}

bool capsule_inside_subdomain(const CapsuleParams& cap, const Subdomain& dom) {
  return ball_inside_subdomain(cap.c1, cap.radius, dom) &&
         ball_inside_subdomain(cap.c2, cap.radius, dom);
}

}  // namespace blitzws
