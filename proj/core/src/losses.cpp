#include "blitzws/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include "blitzws/piecewise.hpp"

namespace blitzws {

namespace {

double sigmoid(double t) {
  if (t >= 0.0) {
    double e = std::exp(-t);
    return 1.0 / (1.0 + e);
  }
  double e = std::exp(t);
  return e / (1.0 + e);
}

double xlogx(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

double log1pexp(double t) {
  if (t > 30.0) return t;
  return std::log1p(std::exp(t));
}

}  // namespace

std::string loss_kind_name(LossKind kind) {
  switch (kind) {
    case LossKind::Squared: return "squared";
    case LossKind::Logistic: return "logistic";
    case LossKind::SquaredHinge: return "squared-hinge";
    case LossKind::Huber: return "huber";
  }
  return "?";
}

LossKind loss_kind_from_name(const std::string& name) {
  if (name == "squared") return LossKind::Squared;
  if (name == "logistic") return LossKind::Logistic;
  if (name == "squared-hinge") return LossKind::SquaredHinge;
  if (name == "huber") return LossKind::Huber;
  throw UsageError("unknown loss kind: " + name);
}

double LossFunction::value(double b, double u) const {
  switch (kind) {
    case LossKind::Squared:
      return 0.5 * (u - b) * (u - b);
    case LossKind::Logistic:
      return 4.0 * log1pexp(-b * u);
    case LossKind::SquaredHinge: {
      double margin = 1.0 - b * u;
      return margin > 0.0 ? 0.5 * margin * margin : 0.0;
    }
    case LossKind::Huber: {
      double r = u - b;
      if (std::abs(r) <= s) return 0.5 * r * r;
      return s * std::abs(r) - 0.5 * s * s;
    }
  }
  return 0.0;
}

double LossFunction::deriv(double b, double u) const {
  switch (kind) {
    case LossKind::Squared:
      return u - b;
    case LossKind::Logistic:
      return -4.0 * b * sigmoid(-b * u);
    case LossKind::SquaredHinge: {
      double margin = 1.0 - b * u;
      return margin > 0.0 ? -b * margin : 0.0;
    }
    case LossKind::Huber:
      return std::clamp(u - b, -s, s);
  }
  return 0.0;
}

double LossFunction::second_deriv(double b, double u) const {
  switch (kind) {
    case LossKind::Squared:
      return 1.0;
    case LossKind::Logistic: {
      double p = sigmoid(-b * u);
      return 4.0 * p * (1.0 - p);
    }
    case LossKind::SquaredHinge:
      return (1.0 - b * u) > 0.0 ? b * b : 0.0;
    case LossKind::Huber:
      return std::abs(u - b) <= s ? 1.0 : 0.0;
  }
  return 0.0;
}

double LossFunction::conjugate(double b, double x) const {
  switch (kind) {
    case LossKind::Squared:
      return 0.5 * (x + b) * (x + b) - 0.5 * b * b;
    case LossKind::Logistic: {
      // Conjugate of 4*log(1 + exp(-b*u)) via the scaling rule; the
      // table's printed row drops the factor 4 inside the logarithms, so
      // the implementation follows the Fenchel transform instead.
      double p = -x * b / 4.0;
      if (p < 0.0 || p > 1.0) return kInfinity;
      return 4.0 * (xlogx(p) + xlogx(1.0 - p));
    }
    case LossKind::SquaredHinge: {
      double r = x / b;
      if (r > 0.0) return kInfinity;
      return 0.5 * (r + 1.0) * (r + 1.0) - 0.5;
    }
    case LossKind::Huber:
      if (std::abs(x) > s) return kInfinity;
      return 0.5 * (x + b) * (x + b) - 0.5 * b * b;
  }
  return 0.0;
}

double LossFunction::conjugate_deriv(double b, double x) const {
  switch (kind) {
    case LossKind::Squared:
      return x + b;
    case LossKind::Logistic: {
      double p = -x * b / 4.0;
      p = std::clamp(p, 1e-300, 1.0 - 1e-16);
      return -b * (std::log(p) - std::log1p(-p));
    }
    case LossKind::SquaredHinge:
      return (x / b + 1.0) / b;
    case LossKind::Huber:
      return x + b;
  }
  return 0.0;
}

void LossFunction::conjugate_domain(double b, double* lo, double* hi) const {
  switch (kind) {
    case LossKind::Squared:
      *lo = -kInfinity;
      *hi = kInfinity;
      return;
    case LossKind::Logistic:
      // p = -x*b/4 in [0, 1]  <=>  x*b in [-4, 0]
      if (b > 0.0) {
        *lo = -4.0 / b;
        *hi = 0.0;
      } else {
        *lo = 0.0;
        *hi = -4.0 / b;
      }
      return;
    case LossKind::SquaredHinge:
      if (b > 0.0) {
        *lo = -kInfinity;
        *hi = 0.0;
      } else {
        *lo = 0.0;
        *hi = kInfinity;
      }
      return;
    case LossKind::Huber:
      *lo = -s;
      *hi = s;
      return;
  }
}

double conjugate_by_search(const LossFunction& loss, double b, double x, double u_span) {
  auto g = [&](double u) { return x * u - loss.value(b, u); };
  double a = -u_span, c = u_span;
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = c - invphi * (c - a);
  double x2 = a + invphi * (c - a);
  double f1 = g(x1), f2 = g(x2);
  for (int it = 0; it < 300 && (c - a) > 1e-13 * u_span; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (c - a);
      f2 = g(x2);
    } else {
      c = x2;
      x2 = x1;
      f2 = f1;
      x1 = c - invphi * (c - a);
      f1 = g(x1);
    }
  }
  return g(0.5 * (a + c));
}

void verify_logistic_conjugate() {
  static std::once_flag flag;
  std::call_once(flag, [] {
    LossFunction loss{LossKind::Logistic};
    for (double b : {-1.0, 1.0}) {
      for (int i = 1; i < 16; ++i) {
        double x = -b * 4.0 * i / 16.0;
        double direct = loss.conjugate(b, x);
        double searched = conjugate_by_search(loss, b, x, 80.0);
        if (std::abs(direct - searched) > 1e-6 * (1.0 + std::abs(direct)))
          throw std::logic_error("logistic conjugate self-test failed");
      }
    }
  });
}

}  // namespace blitzws
