#include "blitzws/piecewise.hpp"

#include <cmath>

namespace blitzws {

double GroupNormCap::group_norm(const Vector& x) const {
  double s = 0.0;
  for (int c : columns) {
    double d = mat->col(c).dot(x);
    s += d * d;
  }
  return std::sqrt(s);
}

bool subdomain_contains(const Subdomain& dom, const Vector& x) {
  return std::visit(
      [&](const auto& d) -> bool {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, HalfSpace>) {
          return d.a.dot(x) <= d.b;
        } else if constexpr (std::is_same_v<T, BallRegion>) {
          return (x - d.center).norm() <= d.radius;
        } else if constexpr (std::is_same_v<T, GroupNormCap>) {
          return d.group_norm(x) <= d.lambda + d.eps;
        } else {
          return true;
        }
      },
      dom);
}

double subfunction_value(const Subfunction& fn, const Vector& x) {
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, LinearPiece>) {
          return f.g.dot(x) + f.c;
        } else if constexpr (std::is_same_v<T, ZeroPiece>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, IndicatorZeroPiece>) {
          return subdomain_contains(f.domain, x) ? 0.0 : kInfinity;
        } else {
          double u = f.a.dot(x);
          return f.q0 + f.q1 * u + f.q2 * u * u;
        }
      },
      fn);
}

bool subfunction_is_linear(const Subfunction& fn) {
  return std::holds_alternative<LinearPiece>(fn) || std::holds_alternative<ZeroPiece>(fn);
}

PiecewiseTerm::PiecewiseTerm(std::vector<Piece> pieces, int size_nnz)
    : pieces_(std::move(pieces)), size_nnz_(size_nnz) {
  if (pieces_.empty()) throw UsageError("PiecewiseTerm: at least one piece required");
  // A term is a constraint when every piece evaluates to zero on its own
  // subdomain and at least one piece is an indicator.
  bool has_indicator = false;
  bool all_flat = true;
  for (const Piece& p : pieces_) {
    if (std::holds_alternative<IndicatorZeroPiece>(p.fn)) has_indicator = true;
    if (!std::holds_alternative<IndicatorZeroPiece>(p.fn) &&
        !std::holds_alternative<ZeroPiece>(p.fn))
      all_flat = false;
  }
  is_constraint_ = has_indicator && all_flat;
}

int PiecewiseTerm::partition(const Vector& x) const {
  for (int k = 0; k < static_cast<int>(pieces_.size()); ++k) {
    if (subdomain_contains(pieces_[k].dom, x)) return k;
  }
  throw UsageError("PiecewiseTerm: subdomains do not cover the query point");
}

double PiecewiseTerm::value(const Vector& x) const {
  return subfunction_value(pieces_[partition(x)].fn, x);
}

double PiecewiseTerm::boundary_slack(const Vector& x) const {
  if (!is_constraint_) return kInfinity;
  const Subdomain& dom = pieces_[0].dom;
  if (const auto* hs = std::get_if<HalfSpace>(&dom)) {
    return std::abs(hs->a.dot(x) - hs->b) / (1.0 + std::abs(hs->b));
  }
  if (const auto* cap = std::get_if<GroupNormCap>(&dom)) {
    return std::abs(cap->group_norm(x) - cap->lambda) / (1.0 + cap->lambda);
  }
  if (const auto* ball = std::get_if<BallRegion>(&dom)) {
    return std::abs((x - ball->center).norm() - ball->radius) / (1.0 + ball->radius);
  }
  return kInfinity;
}

namespace {

class ScaledStronglyConvex final : public StronglyConvex {
 public:
  ScaledStronglyConvex(std::shared_ptr<const StronglyConvex> inner, double scale)
      : inner_(std::move(inner)), scale_(scale) {}
  double value(const Vector& x) const override { return scale_ * inner_->value(x); }
  Vector gradient(const Vector& x) const override { return scale_ * inner_->gradient(x); }
  Vector argmin() const override { return inner_->argmin(); }
  int dim() const override { return inner_->dim(); }

 private:
  std::shared_ptr<const StronglyConvex> inner_;
  double scale_;
};

Subfunction scale_subfunction(const Subfunction& fn, double s) {
  if (const auto* lin = std::get_if<LinearPiece>(&fn)) {
    return LinearPiece{SparseVec::scaled(lin->g, s), s * lin->c};
  }
  if (const auto* q = std::get_if<SmoothQuadraticPiece>(&fn)) {
    return SmoothQuadraticPiece{q->a, s * q->q0, s * q->q1, s * q->q2};
  }
  return fn;  // zero and indicator pieces are invariant under positive scaling
}

}  // namespace

int Assignment::working_set_size() const {
  int n = 0;
  for (Index k : piece)
    if (k == kFull) ++n;
  return n;
}

std::uint64_t Assignment::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  for (Index k : piece) {
    h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(k));
    h *= 1099511628211ull;
  }
  return h;
}

PiecewiseProblem::PiecewiseProblem(std::shared_ptr<const StronglyConvex> psi,
                                   std::vector<PiecewiseTerm> terms, double gamma)
    : psi_(std::move(psi)), terms_(std::move(terms)), gamma_(gamma) {
  if (gamma_ <= 0.0) throw UsageError("PiecewiseProblem: gamma must be positive");
  if (gamma_ != 1.0) {
    double s = 1.0 / gamma_;
    psi_ = std::make_shared<ScaledStronglyConvex>(psi_, s);
    for (PiecewiseTerm& t : terms_) {
      std::vector<Piece> scaled;
      scaled.reserve(t.piece_count());
      for (int k = 0; k < t.piece_count(); ++k) {
        Piece p = t.piece(k);
        p.fn = scale_subfunction(p.fn, s);
        scaled.push_back(std::move(p));
      }
      t = PiecewiseTerm(std::move(scaled), t.size_nnz());
    }
  }
}

double PiecewiseProblem::evaluate_full(const Vector& x) const {
  if (x.size() != dim()) throw UsageError("evaluate_full: dimension mismatch");
  double v = psi_->value(x);
  for (const PiecewiseTerm& t : terms_) {
    v += t.value(x);
    if (std::isinf(v)) return kInfinity;
  }
  return v;
}

PiecewiseProblem::Collapsed PiecewiseProblem::collapse(const Assignment& assignment) const {
  if (static_cast<int>(assignment.piece.size()) != term_count())
    throw UsageError("assignment length must equal the term count");
  Collapsed c;
  c.a_star = Vector::Zero(dim());
  for (int i = 0; i < term_count(); ++i) {
    Index k = assignment.piece[i];
    if (k == Assignment::kFull) {
      c.working.push_back(i);
      continue;
    }
    const Subfunction& fn = terms_[i].piece(k).fn;
    if (const auto* lin = std::get_if<LinearPiece>(&fn)) {
      lin->g.add_to(1.0, c.a_star);
      c.offset += lin->c;
    } else if (!std::holds_alternative<ZeroPiece>(fn)) {
      c.noncollapsed.push_back(i);
    }
  }
  return c;
}

double PiecewiseProblem::evaluate_relaxed(const Assignment& assignment, const Vector& x) const {
  if (x.size() != dim()) throw UsageError("evaluate_relaxed: dimension mismatch");
  std::uint64_t h = assignment.hash();
  Collapsed local;
  const Collapsed* c = nullptr;
  {
    std::lock_guard<std::mutex> lock(cache_->mutex);
    if (!cache_->entry || cache_->entry->first != h) cache_->entry = {h, collapse(assignment)};
    local = cache_->entry->second;
    c = &local;
  }
  double v = psi_->value(x) + c->a_star.dot(x) + c->offset;
  for (int i : c->working) {
    v += terms_[i].value(x);
    if (std::isinf(v)) return kInfinity;
  }
  for (int i : c->noncollapsed) {
    v += subfunction_value(terms_[i].piece(assignment.piece[i]).fn, x);
    if (std::isinf(v)) return kInfinity;
  }
  return v;
}

PiecewiseProblem PiecewiseProblem::reduce_at_solution(
    const Vector& x_star, const std::vector<bool>& boundary_flags) const {
  if (static_cast<int>(boundary_flags.size()) != term_count())
    throw UsageError("reduce_at_solution: flag length must equal the term count");
  std::vector<PiecewiseTerm> reduced;
  reduced.reserve(terms_.size());
  for (int i = 0; i < term_count(); ++i) {
    if (boundary_flags[i]) {
      reduced.push_back(terms_[i]);
      continue;
    }
    Piece p = terms_[i].piece(terms_[i].partition(x_star));
    p.dom = AllSpace{};
    reduced.push_back(PiecewiseTerm({std::move(p)}, terms_[i].size_nnz()));
  }
  PiecewiseProblem out(psi_, std::move(reduced), 1.0);
  out.retained_ = retained_;
  return out;
}

double evaluate_full(const PiecewiseProblem& p, const Vector& x) { return p.evaluate_full(x); }

double evaluate_relaxed(const PiecewiseProblem& p, const Assignment& a, const Vector& x) {
  return p.evaluate_relaxed(a, x);
}

}  // namespace blitzws
