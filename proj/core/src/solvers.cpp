#include "blitzws/solvers.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>

namespace blitzws {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

/// Projection of v onto the box [lo, hi], optionally intersected with the
/// zero-sum hyperplane; the hyperplane multiplier is found by bisection.
Vector project_box_hyperplane(const Vector& v, const Vector& lo, const Vector& hi,
                              bool zero_sum) {
  auto clamp_shift = [&](double nu, Vector* out) {
    double sum = 0.0;
    for (int j = 0; j < v.size(); ++j) {
      double w = std::clamp(v[j] - nu, lo[j], hi[j]);
      if (out) (*out)[j] = w;
      sum += w;
    }
    return sum;
  };
  if (!zero_sum) {
    Vector w(v.size());
    clamp_shift(0.0, &w);
    return w;
  }
  double span = v.cwiseAbs().maxCoeff() + 1.0;
  for (int j = 0; j < v.size(); ++j) {
    if (std::isfinite(lo[j])) span = std::max(span, std::abs(lo[j]) + 1.0);
    if (std::isfinite(hi[j])) span = std::max(span, std::abs(hi[j]) + 1.0);
  }
  double a = -2.0 * span, b = 2.0 * span;
  for (int it = 0; it < 200 && (b - a) > 1e-15 * span; ++it) {
    double mid = 0.5 * (a + b);
    (clamp_shift(mid, nullptr) > 0.0 ? a : b) = mid;
  }
  Vector w(v.size());
  clamp_shift(0.5 * (a + b), &w);
  return w;
}

/// Conjugate-domain box per dual coordinate, shrunk where the conjugate
/// gradient blows up at the boundary (logistic).
void certificate_domain(const Instance& inst, Vector* lo, Vector* hi) {
  int n = inst.dual_dim();
  lo->setConstant(n, -kInfinity);
  hi->setConstant(n, kInfinity);
  if (inst.task != TaskKind::Lasso && inst.task != TaskKind::LogReg) return;
  for (int j = 0; j < n; ++j) {
    double l, h;
    inst.loss.conjugate_domain(inst.labels[j], &l, &h);
    if (inst.loss.kind == LossKind::Logistic) {
      double width = h - l;
      l += 1e-12 * width;
      h -= 1e-12 * width;
    }
    (*lo)[j] = l;
    (*hi)[j] = h;
  }
}

struct PassLoopHooks {
  // Runs one full pass over the working set.
  std::function<void()> pass;
  // Produces (z, lb) for the current state.
  std::function<void(Vector*, LowerBoundModel*)> certify;
};

SubproblemResult run_pass_loop(const SubproblemContext& ctx, const SolverBudget& budget,
                               const PassLoopHooks& hooks) {
  auto t0 = Clock::now();
  SubproblemResult res;
  int passes = 0;
  while (true) {
    hooks.pass();
    ++passes;

    Vector z;
    LowerBoundModel lb;
    hooks.certify(&z, &lb);
    double lb_min = lb.min_value();
    double fz = relaxed_value(*ctx.problem, *ctx.collapsed, *ctx.assignment, z);

    res.z = std::move(z);
    res.lb = std::move(lb);
    res.f_t_at_z = fz;
    res.subgap = fz - lb_min;
    res.achieved_eps = ctx.gap_prev > 0.0 ? res.subgap / ctx.gap_prev : 0.0;

    double half_dist = 0.0;
    if (ctx.x_prev) half_dist = 0.5 * (res.z - *ctx.x_prev).squaredNorm();
    double progress = lb_min - ctx.prev_lb_min;
    double slack = 1e-12 * (1.0 + std::abs(lb_min));
    bool cond1 = res.subgap <= budget.eps_target * ctx.gap_prev + slack;
    bool cond2 = progress >= (1.0 - budget.eps_target) * half_dist - slack;
    if (half_dist > slack) {
      res.dual_shortfall = std::max(0.0, 1.0 - progress / half_dist);
    } else {
      res.dual_shortfall = progress >= -slack ? 0.0 : 1.0;
    }
    res.conditions_met = cond1 && cond2;
    res.passes = passes;
    if (res.conditions_met) break;
    if (passes >= budget.max_passes || seconds_since(t0) >= budget.wall_limit_s) {
      res.budget_exhausted = true;
      break;
    }
  }
  res.x = res.lb.minimizer();
  return res;
}

/// Scale keeping |<A_i, w>| within each working band; slightly shrunk so
/// the scaled point stays strictly feasible under roundoff.
double band_scale(const SparseColumnMatrix& mat, const std::vector<int>& cols,
                  const std::vector<double>& lambdas, const Vector& w) {
  double s = 1.0;
  for (std::size_t k = 0; k < cols.size(); ++k) {
    double d = std::abs(mat.col(cols[k]).dot(w));
    if (d > lambdas[k]) s = std::min(s, lambdas[k] / d);
  }
  return s * (1.0 - 1e-12);
}

}  // namespace

namespace {

Vector checked_seed(const SubproblemContext& ctx) {
  Vector z = *ctx.feasible_seed;
  if (!std::isfinite(relaxed_value(*ctx.problem, *ctx.collapsed, *ctx.assignment, z)))
    throw UsageError("subproblem warm start has non-finite objective");
  return z;
}

}  // namespace

double relaxed_value(const PiecewiseProblem& problem, const PiecewiseProblem::Collapsed& c,
                     const Assignment& assignment, const Vector& x) {
  double v = problem.psi().value(x) + c.a_star.dot(x) + c.offset;
  for (int i : c.working) {
    v += problem.term(i).value(x);
    if (std::isinf(v)) return kInfinity;
  }
  for (int i : c.noncollapsed) {
    v += subfunction_value(problem.term(i).piece(assignment.piece[i]).fn, x);
    if (std::isinf(v)) return kInfinity;
  }
  return v;
}

void attach_collapsed(LowerBoundModel& lb, const PiecewiseProblem::Collapsed& c) {
  lb.collapsed_g = c.a_star;
  lb.collapsed_offset = c.offset;
}

// ---------------------------------------------------------------------------
// Min-norm subproblems: coordinate ascent on the nonnegative multipliers.
// ---------------------------------------------------------------------------

namespace {

class MinNormSolver final : public SubproblemSolver {
 public:
  explicit MinNormSolver(const Instance& inst)
      : inst_(inst), mu_(Vector::Zero(inst.A->cols())) {}

  SubproblemResult solve(const SubproblemContext& ctx, const SolverBudget& budget) override {
    const auto& W = ctx.collapsed->working;
    const SparseColumnMatrix& A = *inst_.A;
    int n = inst_.dual_dim();

    std::vector<bool> in_w(A.cols(), false);
    for (int i : W) in_w[i] = true;
    for (int i = 0; i < A.cols(); ++i)
      if (!in_w[i]) mu_[i] = 0.0;

    Vector w = Vector::Zero(n);
    for (int i : W)
      if (mu_[i] != 0.0) A.col(i).add_to(mu_[i], w);

    Vector z = checked_seed(ctx);
    double psi_z = 0.5 * z.squaredNorm();

    PassLoopHooks hooks;
    hooks.pass = [&]() {
      for (int i : W) {
        double sq = A.col_squared_norm(i);
        if (sq <= 0.0) continue;
        double slack = -A.col(i).dot(w) - inst_.labels[i];  // <a_i, x> - b_i at x = -w
        double mu_new = std::max(0.0, mu_[i] + slack / sq);
        double delta = mu_new - mu_[i];
        if (delta != 0.0) {
          A.col(i).add_to(delta, w);
          mu_[i] = mu_new;
        }
        work_nnz_ += A.col_nnz(i);
      }
      // Advance the feasible point toward x = -w within the working
      // constraints, taking the 1-D quadratic minimizer on the segment.
      Vector x = -w;
      Vector d = x - z;
      double denom = d.squaredNorm();
      if (denom > 0.0) {
        double abar = 1.0;
        for (int i : W) {
          double az = A.col(i).dot(z);
          double ax = A.col(i).dot(x);
          if (ax > inst_.labels[i])
            abar = std::min(abar, (inst_.labels[i] - az) / (ax - az));
        }
        abar = std::max(0.0, abar * (1.0 - 1e-12));
        double alpha = std::clamp(-z.dot(d) / denom, 0.0, abar);
        Vector z_new = z + alpha * d;
        double psi_new = 0.5 * z_new.squaredNorm();
        if (psi_new <= psi_z) {
          z = std::move(z_new);
          psi_z = psi_new;
        }
      }
    };
    hooks.certify = [&](Vector* z_out, LowerBoundModel* lb) {
      *z_out = z;
      lb->anchor = z;
      lb->g_psi = z;
      lb->psi_at_anchor = psi_z;
      lb->terms.clear();
      for (int i : W) {
        if (mu_[i] == 0.0) continue;
        TermAffine t;
        t.term = i;
        t.g = SparseVec::scaled(A.col(i), mu_[i]);
        t.v = mu_[i] * (A.col(i).dot(z) - inst_.labels[i]);
        lb->terms.push_back(std::move(t));
      }
      attach_collapsed(*lb, *ctx.collapsed);
    };
    return run_pass_loop(ctx, budget, hooks);
  }

  Vector primal_model() const override { return mu_; }

 private:
  const Instance& inst_;
  Vector mu_;
};

// ---------------------------------------------------------------------------
// l1-regularized duals: coordinate descent for the squared loss, inexact
// proximal Newton with inner coordinate descent otherwise.
// ---------------------------------------------------------------------------

class L1Solver final : public SubproblemSolver {
 public:
  explicit L1Solver(const Instance& inst)
      : inst_(inst),
        omega_(Vector::Zero(inst.model_dim())),
        pred_(Vector::Zero(inst.dual_dim())) {
    certificate_domain(inst_, &dom_lo_, &dom_hi_);
  }

  SubproblemResult solve(const SubproblemContext& ctx, const SolverBudget& budget) override {
    const SparseColumnMatrix& A = *inst_.A;
    int nf = inst_.feature_count();
    int n = inst_.dual_dim();

    std::vector<int> wf;  // working features
    for (int i : ctx.collapsed->working)
      if (i < nf) wf.push_back(i);
    std::vector<bool> in_w(nf, false);
    for (int i : wf) in_w[i] = true;
    for (int i = 0; i < nf; ++i) {
      if (!in_w[i] && omega_[i] != 0.0) {
        A.col(i).add_to(-omega_[i], pred_);
        omega_[i] = 0.0;
      }
    }
    std::vector<double> lambdas(wf.size(), inst_.lambda);

    Vector z = checked_seed(ctx);
    double fz = relaxed_value(*ctx.problem, *ctx.collapsed, *ctx.assignment, z);

    auto refresh_z = [&]() {
      Vector v(n);
      for (int j = 0; j < n; ++j) v[j] = inst_.loss.deriv(inst_.labels[j], pred_[j]);
      v = project_box_hyperplane(v, dom_lo_, dom_hi_, inst_.bias);
      v *= band_scale(A, wf, lambdas, v);
      double fv = relaxed_value(*ctx.problem, *ctx.collapsed, *ctx.assignment, v);
      if (fv < fz) {
        z = std::move(v);
        fz = fv;
      }
    };

    PassLoopHooks hooks;
    if (inst_.loss.kind == LossKind::Squared) {
      hooks.pass = [&, nf]() {
        cd_pass(wf, nf);
        refresh_z();
      };
    } else {
      hooks.pass = [&, nf]() {
        proxnewton_step(wf, nf, budget.eps_target, ctx.gap_prev);
        refresh_z();
      };
    }
    hooks.certify = [&](Vector* z_out, LowerBoundModel* lb) { build_cert(wf, nf, z, lb, z_out); };
    return run_pass_loop(ctx, budget, hooks);
  }

  Vector primal_model() const override { return omega_; }

 private:
  void cd_pass(const std::vector<int>& wf, int nf) {
    const SparseColumnMatrix& A = *inst_.A;
    for (int i : wf) {
      double sq = A.col_squared_norm(i);
      if (sq <= 0.0) continue;
      double grad = 0.0;
      const SparseVec& col = A.col(i);
      for (int t = 0; t < col.nnz(); ++t)
        grad += col.val[t] * (pred_[col.idx[t]] - inst_.labels[col.idx[t]]);
      double rho = omega_[i] - grad / sq;
      double next = soft_threshold(rho, inst_.lambda / sq);
      if (next != omega_[i]) {
        col.add_to(next - omega_[i], pred_);
        omega_[i] = next;
      }
      work_nnz_ += col.nnz();
    }
    if (inst_.bias) {
      double delta = (inst_.labels - pred_).mean();
      omega_[nf] += delta;
      pred_.array() += delta;
      work_nnz_ += pred_.size();
    }
  }

  void proxnewton_step(const std::vector<int>& wf, int nf, double eps_target, double gap_prev) {
    const SparseColumnMatrix& A = *inst_.A;
    int n = inst_.dual_dim();
    Vector g_loss(n), hess(n);
    for (int j = 0; j < n; ++j) {
      g_loss[j] = inst_.loss.deriv(inst_.labels[j], pred_[j]);
      hess[j] = std::max(inst_.loss.second_deriv(inst_.labels[j], pred_[j]), 1e-10);
    }
    std::vector<double> h(wf.size());
    for (std::size_t k = 0; k < wf.size(); ++k) {
      const SparseVec& col = A.col(wf[k]);
      double s = 0.0;
      for (int t = 0; t < col.nnz(); ++t) s += hess[col.idx[t]] * col.val[t] * col.val[t];
      h[k] = std::max(s, 1e-12);
    }
    double h_bias = hess.sum();

    Vector delta = Vector::Zero(inst_.model_dim());
    Vector a_delta = Vector::Zero(n);
    double inner_tol = 0.1 * eps_target * gap_prev;
    for (int inner = 0; inner < 20; ++inner) {
      double decrease = 0.0;
      for (std::size_t k = 0; k < wf.size(); ++k) {
        int i = wf[k];
        const SparseVec& col = A.col(i);
        double grad = 0.0;
        for (int t = 0; t < col.nnz(); ++t)
          grad += col.val[t] * (g_loss[col.idx[t]] + hess[col.idx[t]] * a_delta[col.idx[t]]);
        double cur = omega_[i] + delta[i];
        double next = soft_threshold(cur - grad / h[k], inst_.lambda / h[k]);
        double step = next - cur;
        if (step != 0.0) {
          delta[i] += step;
          for (int t = 0; t < col.nnz(); ++t) a_delta[col.idx[t]] += step * col.val[t];
          decrease += 0.5 * h[k] * step * step;
        }
        work_nnz_ += col.nnz();
      }
      if (inst_.bias && h_bias > 0.0) {
        double grad = g_loss.sum() + hess.dot(a_delta);
        double step = -grad / h_bias;
        delta[nf] += step;
        a_delta.array() += step;
        decrease += 0.5 * h_bias * step * step;
        work_nnz_ += n;
      }
      if (decrease <= inner_tol) break;
    }

    // Backtracking on the working-set objective.
    double base = 0.0;
    for (int j = 0; j < n; ++j) base += inst_.loss.value(inst_.labels[j], pred_[j]);
    for (int i : wf) base += inst_.lambda * std::abs(omega_[i]);

    double eta = 1.0;
    for (int bt = 0; bt < 30; ++bt) {
      double trial = 0.0;
      for (int j = 0; j < n; ++j)
        trial += inst_.loss.value(inst_.labels[j], pred_[j] + eta * a_delta[j]);
      for (int i : wf) trial += inst_.lambda * std::abs(omega_[i] + eta * delta[i]);
      if (trial <= base + 1e-12 * (1.0 + std::abs(base))) break;
      eta *= 0.5;
    }
    for (int i : wf) omega_[i] += eta * delta[i];
    if (inst_.bias) omega_[nf] += eta * delta[nf];
    pred_ += eta * a_delta;
  }

  void build_cert(const std::vector<int>& wf, int nf, const Vector& z, LowerBoundModel* lb,
                  Vector* z_out) {
    const SparseColumnMatrix& A = *inst_.A;
    *z_out = z;
    lb->anchor = z;
    lb->psi_at_anchor = inst_.problem->psi().value(z);
    lb->g_psi = inst_.problem->psi().gradient(z);
    lb->terms.clear();
    for (int i : wf) {
      if (omega_[i] == 0.0) continue;
      TermAffine t;
      t.term = i;
      t.g = SparseVec::scaled(A.col(i), -omega_[i]);
      t.v = -omega_[i] * A.col(i).dot(z) - inst_.lambda * std::abs(omega_[i]);
      lb->terms.push_back(std::move(t));
    }
    if (inst_.bias && omega_[nf] != 0.0) {
      TermAffine t;
      t.term = nf;  // bias band term sits after the feature terms
      t.g = SparseVec::scaled(inst_.aux->col(0), -omega_[nf]);
      t.v = -omega_[nf] * z.sum();
      lb->terms.push_back(std::move(t));
    }
  }

  const Instance& inst_;
  Vector omega_;
  Vector pred_;
  Vector dom_lo_, dom_hi_;
};

// ---------------------------------------------------------------------------
// Group lasso dual: block coordinate descent with the secular-equation
// bisection for each group update.
// ---------------------------------------------------------------------------

class GroupBcdSolver final : public SubproblemSolver {
 public:
  explicit GroupBcdSolver(const Instance& inst)
      : inst_(inst),
        omega_(Vector::Zero(inst.model_dim())),
        pred_(Vector::Zero(inst.dual_dim())) {
    prepare_groups();
  }

  SubproblemResult solve(const SubproblemContext& ctx, const SolverBudget& budget) override {
    int ng = static_cast<int>(inst_.groups.size());
    int nf = inst_.feature_count();
    std::vector<int> wg;
    for (int i : ctx.collapsed->working)
      if (i < ng) wg.push_back(i);
    std::vector<bool> in_w(ng, false);
    for (int i : wg) in_w[i] = true;
    for (int g = 0; g < ng; ++g) {
      if (in_w[g]) continue;
      for (int c : inst_.groups[g]) {
        if (omega_[c] != 0.0) {
          inst_.A->col(c).add_to(-omega_[c], pred_);
          omega_[c] = 0.0;
        }
      }
    }

    Vector z = checked_seed(ctx);
    double fz = relaxed_value(*ctx.problem, *ctx.collapsed, *ctx.assignment, z);

    PassLoopHooks hooks;
    hooks.pass = [&]() {
      for (int g : wg) bcd_update(g);
      if (inst_.bias) {
        double delta = (inst_.labels - pred_).mean();
        omega_[nf] += delta;
        pred_.array() += delta;
        work_nnz_ += pred_.size();
      }
      // Dual candidate: residual, centered when a bias is present, scaled
      // into the working group caps.
      Vector v = pred_ - inst_.labels;
      if (inst_.bias) v.array() -= v.mean();
      double s = 1.0;
      for (int g : wg) {
        double norm = group_cap_norm(g, v);
        if (norm > inst_.lambda) s = std::min(s, inst_.lambda / norm);
      }
      v *= s * (1.0 - 1e-12);
      double fv = relaxed_value(*ctx.problem, *ctx.collapsed, *ctx.assignment, v);
      if (fv < fz) {
        z = std::move(v);
        fz = fv;
      }
    };
    hooks.certify = [&](Vector* z_out, LowerBoundModel* lb) {
      *z_out = z;
      lb->anchor = z;
      lb->psi_at_anchor = inst_.problem->psi().value(z);
      lb->g_psi = z + inst_.labels;
      lb->terms.clear();
      for (int g : wg) {
        double norm_w = 0.0;
        for (int c : inst_.groups[g]) norm_w += omega_[c] * omega_[c];
        norm_w = std::sqrt(norm_w);
        if (norm_w == 0.0) continue;
        Vector dense = Vector::Zero(inst_.dual_dim());
        double dotz = 0.0;
        for (int c : inst_.groups[g]) {
          inst_.A->col(c).add_to(-omega_[c], dense);
          dotz += omega_[c] * inst_.A->col(c).dot(z);
        }
        TermAffine t;
        t.term = g;
        t.g = SparseVec::from_dense(dense);
        t.v = -dotz - inst_.lambda * norm_w;
        lb->terms.push_back(std::move(t));
      }
      int ng2 = static_cast<int>(inst_.groups.size());
      if (inst_.bias && omega_[inst_.feature_count()] != 0.0) {
        TermAffine t;
        t.term = ng2;
        t.g = SparseVec::scaled(inst_.aux->col(0), -omega_[inst_.feature_count()]);
        t.v = -omega_[inst_.feature_count()] * z.sum();
        lb->terms.push_back(std::move(t));
      }
    };
    return run_pass_loop(ctx, budget, hooks);
  }

  Vector primal_model() const override { return omega_; }

 private:
  struct GroupFactor {
    bool diagonal = true;
    Vector eigvals;        // of A_G^T A_G
    Eigen::MatrixXd eigvecs;
  };

  void prepare_groups() {
    factors_.resize(inst_.groups.size());
    for (std::size_t g = 0; g < inst_.groups.size(); ++g) {
      const auto& cols = inst_.groups[g];
      int p = static_cast<int>(cols.size());
      Eigen::MatrixXd M = Eigen::MatrixXd::Zero(p, p);
      for (int a = 0; a < p; ++a) {
        Vector da = inst_.A->col(cols[a]).to_dense(inst_.dual_dim());
        for (int b = a; b < p; ++b) {
          double dot = inst_.A->col(cols[b]).dot(da);
          M(a, b) = dot;
          M(b, a) = dot;
        }
      }
      double off = 0.0, diag = 0.0;
      for (int a = 0; a < p; ++a)
        for (int b = 0; b < p; ++b) (a == b ? diag : off) += std::abs(M(a, b));
      GroupFactor f;
      if (off <= 1e-12 * (1.0 + diag)) {
        f.diagonal = true;
        f.eigvals = M.diagonal();
      } else {
        f.diagonal = false;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
        f.eigvals = es.eigenvalues();
        f.eigvecs = es.eigenvectors();
      }
      factors_[g] = std::move(f);
    }
  }

  double group_cap_norm(int g, const Vector& x) const {
    double s = 0.0;
    for (int c : inst_.groups[g]) {
      double d = inst_.A->col(c).dot(x);
      s += d * d;
    }
    return std::sqrt(s);
  }

  void bcd_update(int g) {
    const auto& cols = inst_.groups[g];
    int p = static_cast<int>(cols.size());
    // u = residual without this group's contribution; grad = -A_G^T u.
    Vector grad(p);
    for (int a = 0; a < p; ++a) {
      double dot_res = inst_.A->col(cols[a]).dot(pred_) -
                       inst_.A->col(cols[a]).dot(inst_.labels);
      double self = 0.0;
      for (int b = 0; b < p; ++b) {
        if (omega_[cols[b]] == 0.0) continue;
        self += omega_[cols[b]] * gram(g, a, b);
      }
      grad[a] = -(dot_res - self);
      work_nnz_ += inst_.A->col_nnz(cols[a]);
    }
    Vector v_new = group_shrink(g, grad);
    for (int a = 0; a < p; ++a) {
      double delta = v_new[a] - omega_[cols[a]];
      if (delta != 0.0) {
        inst_.A->col(cols[a]).add_to(delta, pred_);
        omega_[cols[a]] = v_new[a];
      }
    }
  }

  double gram(int g, int a, int b) const {
    const auto& f = factors_[g];
    if (f.diagonal) return a == b ? f.eigvals[a] : 0.0;
    // M = Q diag(d) Q^T
    double s = 0.0;
    for (int k = 0; k < f.eigvals.size(); ++k)
      s += f.eigvecs(a, k) * f.eigvals[k] * f.eigvecs(b, k);
    return s;
  }

  /// argmin_v 0.5 v^T M v - <grad, v> + lambda ||v|| via the secular
  /// equation in the eigenbasis of M, solved by bisection.
  Vector group_shrink(int g, const Vector& grad) {
    const auto& f = factors_[g];
    int p = static_cast<int>(grad.size());
    Vector gt = f.diagonal ? grad : Vector(f.eigvecs.transpose() * grad);
    if (gt.norm() <= inst_.lambda) return Vector::Zero(p);

    auto excess = [&](double s) {
      double sum = 0.0;
      for (int k = 0; k < p; ++k) {
        double q = gt[k] / (f.eigvals[k] * s + inst_.lambda);
        sum += q * q;
      }
      return sum - 1.0;
    };
    double lo = 0.0, hi = 1.0;
    while (excess(hi) > 0.0 && hi < 1e18) hi *= 2.0;
    for (int it = 0; it < 200 && (hi - lo) > 1e-14 * hi; ++it) {
      double mid = 0.5 * (lo + hi);
      (excess(mid) > 0.0 ? lo : hi) = mid;
    }
    double s = 0.5 * (lo + hi);
    Vector vt(p);
    for (int k = 0; k < p; ++k) vt[k] = gt[k] * s / (f.eigvals[k] * s + inst_.lambda);
    return f.diagonal ? vt : Vector(f.eigvecs * vt);
  }

  const Instance& inst_;
  Vector omega_;
  Vector pred_;
  std::vector<GroupFactor> factors_;
};

// ---------------------------------------------------------------------------
// SVM primal subproblems: dual coordinate ascent over the working examples.
// ---------------------------------------------------------------------------

class SvmDcaSolver final : public SubproblemSolver {
 public:
  explicit SvmDcaSolver(const Instance& inst)
      : inst_(inst), alpha_(Vector::Zero(inst.A->cols())) {}

  SubproblemResult solve(const SubproblemContext& ctx, const SolverBudget& budget) override {
    const SparseColumnMatrix& A = *inst_.A;
    const auto& W = ctx.collapsed->working;
    double C = inst_.lambda;

    Vector x = -ctx.collapsed->a_star;
    for (int i : W)
      if (alpha_[i] != 0.0) A.col(i).add_to(alpha_[i] * inst_.labels[i], x);

    Vector z = x;
    double fz = relaxed_value(*ctx.problem, *ctx.collapsed, *ctx.assignment, z);

    PassLoopHooks hooks;
    hooks.pass = [&]() {
      for (int i : W) {
        double sq = A.col_squared_norm(i);
        if (sq <= 0.0) continue;
        double margin_grad = inst_.labels[i] * A.col(i).dot(x) - 1.0;
        double next = std::clamp(alpha_[i] - margin_grad / sq, 0.0, C);
        double delta = next - alpha_[i];
        if (delta != 0.0) {
          A.col(i).add_to(delta * inst_.labels[i], x);
          alpha_[i] = next;
        }
        work_nnz_ += A.col_nnz(i);
      }
      double fv = relaxed_value(*ctx.problem, *ctx.collapsed, *ctx.assignment, x);
      if (fv < fz) {
        z = x;
        fz = fv;
      }
    };
    hooks.certify = [&](Vector* z_out, LowerBoundModel* lb) {
      *z_out = z;
      lb->anchor = z;
      lb->g_psi = z;
      lb->psi_at_anchor = 0.5 * z.squaredNorm();
      lb->terms.clear();
      for (int i : W) {
        if (alpha_[i] == 0.0) continue;
        TermAffine t;
        t.term = i;
        t.g = SparseVec::scaled(A.col(i), -alpha_[i] * inst_.labels[i]);
        t.v = alpha_[i] * (1.0 - inst_.labels[i] * A.col(i).dot(z));
        lb->terms.push_back(std::move(t));
      }
      attach_collapsed(*lb, *ctx.collapsed);
    };
    return run_pass_loop(ctx, budget, hooks);
  }

  Vector primal_model() const override { return alpha_; }

 private:
  const Instance& inst_;
  Vector alpha_;
};

}  // namespace

std::unique_ptr<SubproblemSolver> make_min_norm_solver(const Instance& inst) {
  return std::make_unique<MinNormSolver>(inst);
}
std::unique_ptr<SubproblemSolver> make_l1_solver(const Instance& inst) {
  return std::make_unique<L1Solver>(inst);
}
std::unique_ptr<SubproblemSolver> make_group_bcd_solver(const Instance& inst) {
  return std::make_unique<GroupBcdSolver>(inst);
}
std::unique_ptr<SubproblemSolver> make_svm_dca_solver(const Instance& inst) {
  return std::make_unique<SvmDcaSolver>(inst);
}

}  // namespace blitzws
