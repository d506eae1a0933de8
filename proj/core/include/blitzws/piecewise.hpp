#pragma once

#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <variant>
#include <vector>

#include "blitzws/types.hpp"

namespace blitzws {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Subdomains
// ---------------------------------------------------------------------------

/// { x : <a, x> <= b }
struct HalfSpace {
  SparseVec a;
  double b = 0.0;
};

/// { x : ||x - center|| <= radius }
struct BallRegion {
  Vector center;
  double radius = 0.0;
};

/// { x : ||A_G^T x|| <= lambda } for the columns in `columns` of `*mat`.
/// `lipschitz` bounds the operator norm of A_G^T, so that
/// ||A_G^T u|| <= lipschitz * ||u||; containment tests use the inner
/// relaxation { x : ||A_G^T c|| + lipschitz * ||x - c|| <= lambda }.
/// `eps` widens membership tests; equality constraints (lambda = 0) need
/// a roundoff allowance to admit computed feasible points.
struct GroupNormCap {
  const SparseColumnMatrix* mat = nullptr;
  std::vector<int> columns;
  double lambda = 0.0;
  double lipschitz = 0.0;
  double eps = 0.0;

  double group_norm(const Vector& x) const;
};

/// Catch-all subdomain covering the whole space.
struct AllSpace {};

using Subdomain = std::variant<HalfSpace, BallRegion, GroupNormCap, AllSpace>;

bool subdomain_contains(const Subdomain& dom, const Vector& x);

// ---------------------------------------------------------------------------
// Subfunctions
// ---------------------------------------------------------------------------

/// <g, x> + c, evaluated exactly.
struct LinearPiece {
  SparseVec g;
  double c = 0.0;
};

struct ZeroPiece {};

/// 0 inside `domain`, +inf outside.
struct IndicatorZeroPiece {
  Subdomain domain;
};

/// q0 + q1 * <a, x> + q2 * <a, x>^2 with q2 >= 0.
struct SmoothQuadraticPiece {
  SparseVec a;
  double q0 = 0.0, q1 = 0.0, q2 = 0.0;
};

using Subfunction =
    std::variant<LinearPiece, ZeroPiece, IndicatorZeroPiece, SmoothQuadraticPiece>;

double subfunction_value(const Subfunction& fn, const Vector& x);
bool subfunction_is_linear(const Subfunction& fn);

// ---------------------------------------------------------------------------
// Piecewise terms
// ---------------------------------------------------------------------------

struct Piece {
  Subfunction fn;
  Subdomain dom;
  /// True when `fn` lower-bounds the whole term everywhere; this settles
  /// the working-set lower-bound condition in closed form.
  bool global_minorant = false;
};

class PiecewiseTerm {
 public:
  PiecewiseTerm() = default;
  PiecewiseTerm(std::vector<Piece> pieces, int size_nnz);

  int piece_count() const { return static_cast<int>(pieces_.size()); }
  const Piece& piece(int k) const { return pieces_[k]; }

  /// Index of the subdomain containing x; ties on boundaries resolve to
  /// the lowest index.
  int partition(const Vector& x) const;

  double value(const Vector& x) const;

  /// Number of matrix nonzeros touched by this term (the ProblemSize unit).
  int size_nnz() const { return size_nnz_; }

  /// Constraint terms are zero-on-a-set indicators; they carry an activity
  /// notion used by the working-set rule for active constraints.
  bool is_constraint() const { return is_constraint_; }

  /// Relative slack of x against the constraint boundary; +inf for
  /// non-constraint terms.
  double boundary_slack(const Vector& x) const;

 private:
  std::vector<Piece> pieces_;
  int size_nnz_ = 0;
  bool is_constraint_ = false;
};

// ---------------------------------------------------------------------------
// Strongly convex component
// ---------------------------------------------------------------------------

class StronglyConvex {
 public:
  virtual ~StronglyConvex() = default;
  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;
  virtual Vector argmin() const = 0;
  virtual int dim() const = 0;

  /// Largest step alpha in [0, 1] keeping y + alpha * dir inside dom(psi);
  /// 1 for full-domain functions.
  virtual double max_feasible_step(const Vector& y, const Vector& dir) const {
    (void)y;
    (void)dir;
    return 1.0;
  }
};

/// 0.5 * ||x - center||^2 + offset
class QuadraticPsi final : public StronglyConvex {
 public:
  QuadraticPsi(Vector center, double offset = 0.0)
      : center_(std::move(center)), offset_(offset) {}

  double value(const Vector& x) const override {
    return 0.5 * (x - center_).squaredNorm() + offset_;
  }
  Vector gradient(const Vector& x) const override { return x - center_; }
  Vector argmin() const override { return center_; }
  int dim() const override { return static_cast<int>(center_.size()); }

 private:
  Vector center_;
  double offset_;
};

// ---------------------------------------------------------------------------
// Assignments and the relaxed objective
// ---------------------------------------------------------------------------

/// Per-term piece choice; kFull keeps the original piecewise term.
struct Assignment {
  static constexpr Index kFull = -1;
  std::vector<Index> piece;

  static Assignment all_full(int m) { return Assignment{std::vector<Index>(m, kFull)}; }
  int working_set_size() const;
  std::uint64_t hash() const;
  bool operator==(const Assignment& other) const { return piece == other.piece; }
};

// ---------------------------------------------------------------------------
// The problem
// ---------------------------------------------------------------------------

class PiecewiseProblem {
 public:
  /// `psi` must be gamma-strongly convex; the constructor normalizes the
  /// objective by 1/gamma so downstream code sees a 1-strongly convex psi.
  /// Only linear pieces change under the scaling.
  PiecewiseProblem(std::shared_ptr<const StronglyConvex> psi,
                   std::vector<PiecewiseTerm> terms, double gamma = 1.0);

  int dim() const { return psi_->dim(); }
  int term_count() const { return static_cast<int>(terms_.size()); }
  const PiecewiseTerm& term(int i) const { return terms_[i]; }
  const StronglyConvex& psi() const { return *psi_; }
  double gamma() const { return gamma_; }

  /// psi(x) + sum_i phi_i(x); +inf when an indicator is violated.
  double evaluate_full(const Vector& x) const;

  /// f_t(x) for the given per-term assignment.  Assigned linear pieces are
  /// collapsed into a cached (a_star, offset) pair keyed by the assignment
  /// hash, so evaluation cost scales with the working set.
  double evaluate_relaxed(const Assignment& assignment, const Vector& x) const;

  int partition_index(int term, const Vector& x) const { return terms_[term].partition(x); }

  /// Replaces phi_i by its piece at x_star wherever boundary_flags[i] is
  /// false.  The returned problem shares the minimizer with this one.
  PiecewiseProblem reduce_at_solution(const Vector& x_star,
                                      const std::vector<bool>& boundary_flags) const;

  /// Keeps auxiliary data (e.g. the design matrix backing GroupNormCap
  /// subdomains) alive for the problem's lifetime.
  void retain(std::shared_ptr<const void> data) { retained_.push_back(std::move(data)); }

  struct Collapsed {
    Vector a_star;
    double offset = 0.0;
    std::vector<int> working;        // assignment kFull
    std::vector<int> noncollapsed;   // assigned but not linear/zero
  };

  /// Collapse of the assigned pieces; no caching.
  Collapsed collapse(const Assignment& assignment) const;

 private:
  std::shared_ptr<const StronglyConvex> psi_;
  std::vector<PiecewiseTerm> terms_;
  double gamma_ = 1.0;
  std::vector<std::shared_ptr<const void>> retained_;

  struct CollapseCache {
    std::mutex mutex;
    std::optional<std::pair<std::uint64_t, Collapsed>> entry;
  };
  std::shared_ptr<CollapseCache> cache_ = std::make_shared<CollapseCache>();
};

// Spec-level operation aliases.
double evaluate_full(const PiecewiseProblem& p, const Vector& x);
double evaluate_relaxed(const PiecewiseProblem& p, const Assignment& a, const Vector& x);

}  // namespace blitzws
