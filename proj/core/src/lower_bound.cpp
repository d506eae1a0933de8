#include "blitzws/lower_bound.hpp"

namespace blitzws {

Vector LowerBoundModel::total_gradient() const {
  Vector g = g_psi;
  if (collapsed_g.size() == g.size()) g += collapsed_g;
  for (const TermAffine& t : terms) t.g.add_to(1.0, g);
  return g;
}

Vector LowerBoundModel::minimizer() const { return anchor - total_gradient(); }

double LowerBoundModel::value_at_anchor() const {
  double v = psi_at_anchor + collapsed_offset;
  if (collapsed_g.size() == anchor.size()) v += collapsed_g.dot(anchor);
  for (const TermAffine& t : terms) v += t.v;
  return v;
}

double LowerBoundModel::value(const Vector& x) const {
  Vector dx = x - anchor;
  double v = psi_at_anchor + g_psi.dot(dx) + 0.5 * dx.squaredNorm() + collapsed_offset;
  if (collapsed_g.size() == x.size()) v += collapsed_g.dot(x);
  for (const TermAffine& t : terms) v += t.v + t.g.dot(dx);
  return v;
}

double LowerBoundModel::min_value() const {
  return value_at_anchor() - 0.5 * total_gradient().squaredNorm();
}

const TermAffine* LowerBoundModel::find_term(int i) const {
  for (const TermAffine& t : terms)
    if (t.term == i) return &t;
  return nullptr;
}

Vector minimize_lower_bound(const LowerBoundModel& lb) { return lb.minimizer(); }

}  // namespace blitzws
