#include "blitzws/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace blitzws {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int env_threads() {
  const char* s = std::getenv("BLITZWS_THREADS");
  if (!s) return 1;
  int v = std::atoi(s);
  return v > 0 ? v : 1;
}

void parallel_for(int n, int threads, const std::function<void(int, int)>& body) {
  if (threads <= 1 || n < 2 * threads) {
    body(0, n);
    return;
  }
  std::vector<std::thread> pool;
  int chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    int lo = t * chunk;
    int hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back(body, lo, hi);
  }
  for (auto& th : pool) th.join();
}

bool sparse_slope_equal(const SparseVec& a, const SparseVec& b) {
  double scale = 1.0;
  for (double v : a.val) scale = std::max(scale, std::abs(v));
  for (double v : b.val) scale = std::max(scale, std::abs(v));
  double tol = 1e-12 * scale;
  std::size_t ia = 0, ib = 0;
  while (ia < a.idx.size() || ib < b.idx.size()) {
    if (ia < a.idx.size() && (ib >= b.idx.size() || a.idx[ia] < b.idx[ib])) {
      if (std::abs(a.val[ia]) > tol) return false;
      ++ia;
    } else if (ib < b.idx.size() && (ia >= a.idx.size() || b.idx[ib] < a.idx[ia])) {
      if (std::abs(b.val[ib]) > tol) return false;
      ++ib;
    } else {
      if (std::abs(a.val[ia] - b.val[ib]) > tol) return false;
      ++ia;
      ++ib;
    }
  }
  return true;
}

bool slope_is_zero(const SparseVec& a) {
  for (double v : a.val)
    if (v != 0.0) return false;
  return true;
}

}  // namespace

double extreme_feasible_alpha(const PiecewiseProblem& problem, const Vector& y, const Vector& z) {
  Vector d = z - y;
  double alpha = problem.psi().max_feasible_step(y, d);
  for (int i = 0; i < problem.term_count(); ++i) {
    const PiecewiseTerm& term = problem.term(i);
    if (!term.is_constraint()) continue;
    const Subdomain& dom = term.piece(0).dom;
    if (const auto* hs = std::get_if<HalfSpace>(&dom)) {
      double az = hs->a.dot(z);
      if (az > hs->b) {
        double ay = hs->a.dot(y);
        alpha = std::min(alpha, (hs->b - ay) / (az - ay));
      }
    } else if (const auto* cap = std::get_if<GroupNormCap>(&dom)) {
      int p = static_cast<int>(cap->columns.size());
      Vector u(p), v(p);
      for (int k = 0; k < p; ++k) {
        u[k] = cap->mat->col(cap->columns[k]).dot(y);
        v[k] = cap->mat->col(cap->columns[k]).dot(z) - u[k];
      }
      if ((u + v).norm() > cap->lambda + cap->eps) {
        // ||u + a v||^2 = lambda^2 at the crossing.
        double A = v.squaredNorm();
        double B = 2.0 * u.dot(v);
        double Cq = u.squaredNorm() - cap->lambda * cap->lambda;
        double disc = std::max(B * B - 4.0 * A * Cq, 0.0);
        if (A > 0.0) alpha = std::min(alpha, (-B + std::sqrt(disc)) / (2.0 * A));
      }
    } else if (const auto* ball = std::get_if<BallRegion>(&dom)) {
      Vector u = y - ball->center;
      Vector v = z - y;
      if ((u + v).norm() > ball->radius) {
        double A = v.squaredNorm();
        double B = 2.0 * u.dot(v);
        double Cq = u.squaredNorm() - ball->radius * ball->radius;
        double disc = std::max(B * B - 4.0 * A * Cq, 0.0);
        if (A > 0.0) alpha = std::min(alpha, (-B + std::sqrt(disc)) / (2.0 * A));
      }
    }
  }
  return std::clamp(alpha, 0.0, 1.0);
}

Vector line_search_y(const PiecewiseProblem& problem, const Vector& y_prev, const Vector& z) {
  if (!std::isfinite(problem.evaluate_full(y_prev)))
    throw UsageError("line_search_y: f(y_prev) must be finite");

  bool pure_indicator = true;
  for (int i = 0; i < problem.term_count(); ++i)
    if (!problem.term(i).is_constraint()) pure_indicator = false;

  double abar = extreme_feasible_alpha(problem, y_prev, z);
  Vector d = z - y_prev;
  if (pure_indicator) {
    // Extreme feasible point, pulled off the boundary by a hair so the
    // result stays feasible under roundoff.
    double alpha = abar < 1.0 ? abar * (1.0 - 1e-12) : 1.0;
    return y_prev + alpha * d;
  }

  auto g = [&](double a) { return problem.evaluate_full(y_prev + a * d); };
  double lo = 0.0, hi = abar;
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - invphi * (hi - lo);
  double x2 = lo + invphi * (hi - lo);
  double f1 = g(x1), f2 = g(x2);
  while (hi - lo > 1e-10) {
    if (f1 > f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = g(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = g(x1);
    }
  }
  double mid = 0.5 * (lo + hi);
  double best_a = mid, best_f = g(mid);
  for (double a : {0.0, abar}) {
    double fa = g(a);
    if (fa < best_f) {
      best_f = fa;
      best_a = a;
    }
  }
  return y_prev + best_a * d;
}

double compute_gap(const PiecewiseProblem& problem, const Vector& y, const LowerBoundModel& lb) {
  double fy = problem.evaluate_full(y);
  if (!std::isfinite(fy)) throw UsageError("compute_gap: f(y) must be finite");
  double gap = fy - lb.min_value();
  if (gap < 0.0 && gap > -1e-12 * (1.0 + std::abs(fy))) gap = 0.0;
  return gap;
}

WorkingSetEngine::WorkingSetEngine(const Instance& inst, EngineOptions opts)
    : inst_(inst), opts_(opts) {
  threads_ = opts_.threads > 0 ? opts_.threads : env_threads();
  solver_ = inst_.make_solver();
  state_.y = inst_.initial_feasible();
  state_.lb_model = inst_.initial_lower_bound();
  state_.x = state_.lb_model.minimizer();
  state_.z = state_.lb_model.anchor;
  state_.t = 0;
  lb_min_monotone_ = state_.lb_model.min_value();
  state_.gap = compute_gap(*inst_.problem, state_.y, state_.lb_model);
  prev_assignment_ = Assignment::all_full(inst_.problem->term_count());
  double fy = inst_.problem->evaluate_full(state_.y);
  converged_ = state_.gap <= opts_.rel_tol * (1.0 + std::abs(fy));
}

bool WorkingSetEngine::c3_upper_bounds(int i, const Subfunction& candidate) const {
  // The previous model's minorant for term i: an explicit certificate
  // entry, an assigned linear piece, or zero.
  SparseVec slope;
  double c0 = 0.0;
  if (const TermAffine* aff = state_.lb_model.find_term(i)) {
    slope = aff->g;
    c0 = aff->v - aff->g.dot(state_.lb_model.anchor);
  } else if (prev_assignment_.piece.size() > static_cast<std::size_t>(i) &&
             prev_assignment_.piece[i] != Assignment::kFull) {
    const Subfunction& fn = inst_.problem->term(i).piece(prev_assignment_.piece[i]).fn;
    if (const auto* lin = std::get_if<LinearPiece>(&fn)) {
      slope = lin->g;
      c0 = lin->c;
    }
  }

  double scale = 1.0;
  for (double v : slope.val) scale = std::max(scale, std::abs(v));
  double tol = 1e-12 * (1.0 + scale + std::abs(c0));

  if (std::holds_alternative<ZeroPiece>(candidate)) {
    return slope_is_zero(slope) ? c0 <= tol : false;
  }
  if (const auto* lin = std::get_if<LinearPiece>(&candidate)) {
    return sparse_slope_equal(lin->g, slope) && lin->c >= c0 - tol;
  }
  return false;
}

bool WorkingSetEngine::term_in_working_set(int i, const CapsuleParams& cap,
                                           int* candidate_piece) const {
  const PiecewiseTerm& term = inst_.problem->term(i);
  if (term.is_constraint() && term.boundary_slack(state_.x) <= opts_.activity_tol) return true;
  int k = term.partition(cap.c1);
  *candidate_piece = k;
  const Piece& piece = term.piece(k);
  if (!capsule_inside_subdomain(cap, piece.dom)) return true;  // equivalence not guaranteed
  if (!piece.global_minorant) return true;                     // would break the gap bound
  if (!subfunction_is_linear(piece.fn)) return true;           // no collapse benefit
  if (!c3_upper_bounds(i, piece.fn)) return true;              // would break monotonicity
  return false;
}

Assignment WorkingSetEngine::select_working_set(const CapsuleParams& cap) const {
  int m = inst_.problem->term_count();
  Assignment out;
  out.piece.assign(m, Assignment::kFull);
  parallel_for(m, threads_, [&](int lo, int hi) {
    for (int i = lo; i < hi; ++i) {
      int k = -1;
      if (!term_in_working_set(i, cap, &k)) out.piece[i] = static_cast<Index>(k);
    }
  });
  return out;
}

WorkingSetEngine::GridSweep WorkingSetEngine::sweep_problem_sizes(const IterSnapshot& snap) const {
  const auto& grid = TuningModel::xi_grid();
  int g = static_cast<int>(grid.size());
  int m = inst_.problem->term_count();
  GridSweep sweep;
  sweep.capsules.resize(g);
  for (int j = 0; j < g; ++j) sweep.capsules[j] = compute_capsule(snap, grid[j]);

  // Working sets are nested across xi: sweep descending and record each
  // term's entry threshold once.
  std::vector<int> threshold(m, g);  // grid index where the term enters
  std::vector<char> active(m, 1);
  for (int j = g - 1; j >= 0; --j) {
    if (!sweep.capsules[j]) continue;
    const CapsuleParams& cap = *sweep.capsules[j];
    parallel_for(m, threads_, [&](int lo, int hi) {
      for (int i = lo; i < hi; ++i) {
        if (!active[i]) continue;
        int k = -1;
        if (term_in_working_set(i, cap, &k))
          threshold[i] = j;
        else
          active[i] = 0;
      }
    });
  }

  std::vector<std::int64_t> add(g + 1, 0);
  for (int i = 0; i < m; ++i)
    if (threshold[i] < g) add[threshold[i]] += inst_.problem->term(i).size_nnz();
  sweep.ps_by_xi.assign(g, 0);
  std::int64_t acc = 0;
  for (int j = 0; j < g; ++j) {
    acc += add[j];
    sweep.ps_by_xi[j] = acc;
  }
  return sweep;
}

IterationRecord WorkingSetEngine::run_iteration() {
  if (converged_) throw UsageError("run_iteration: already converged");
  int t = state_.t + 1;
  auto setup_start = Clock::now();

  IterSnapshot snap = IterSnapshot::make(state_.x, state_.y, state_.gap);

  double xi = 1.0, eps = 0.0;
  std::optional<CapsuleParams> cap;
  Assignment assignment;
  if (t == 1) {
    // First iteration: the smallest progress coefficient whose working set
    // is the whole problem; the solver runs a single crude pass.
    const auto& grid = TuningModel::xi_grid();
    for (double xi_c : grid) {
      auto cap_c = compute_capsule(snap, xi_c);
      if (!cap_c) break;
      Assignment a = select_working_set(*cap_c);
      if (a.working_set_size() == inst_.problem->term_count()) {
        xi = xi_c;
        cap = std::move(cap_c);
        assignment = std::move(a);
        break;
      }
    }
    if (!cap) {
      cap = compute_capsule(snap, 1.0);
      if (cap) assignment = select_working_set(*cap);
    }
  } else if (opts_.adaptive) {
    GridSweep sweep = sweep_problem_sizes(snap);
    TuningModel::Choice choice = tuner_.choose(sweep.ps_by_xi);
    xi = choice.xi;
    eps = choice.eps;
    cap = sweep.capsules[choice.xi_index];
    if (cap) assignment = select_working_set(*cap);
  } else {
    xi = opts_.fixed_xi;
    eps = opts_.fixed_eps;
    cap = compute_capsule(snap, xi);
    if (cap) assignment = select_working_set(*cap);
  }

  IterationRecord rec;
  rec.t = t;
  rec.xi = xi;
  if (!cap) {
    converged_ = true;
    rec.gap = state_.gap;
    return rec;
  }

  PiecewiseProblem::Collapsed collapsed = inst_.problem->collapse(assignment);
  std::int64_t ps = 0;
  for (int i : collapsed.working) ps += inst_.problem->term(i).size_nnz();

  SolverBudget budget;
  budget.eps_target = eps;
  budget.max_passes = t == 1 ? 1 : opts_.max_passes_per_subproblem;
  if (t > 1 && opts_.adaptive && tuner_.samples() > 0 && eps > 0.0) {
    double limit = tuner_.c_solve() * static_cast<double>(ps) / eps;
    if (limit > 0.0) budget.wall_limit_s = limit;
  }

  SubproblemContext ctx;
  ctx.problem = inst_.problem.get();
  ctx.assignment = &assignment;
  ctx.collapsed = &collapsed;
  ctx.gap_prev = state_.gap;
  ctx.prev_lb_min = lb_min_monotone_;
  ctx.x_prev = &state_.x;
  ctx.feasible_seed = &state_.y;

  double t_setup_pre = seconds_since(setup_start);
  auto solve_start = Clock::now();
  SubproblemResult res = solver_->solve(ctx, budget);
  double t_solve = seconds_since(solve_start);

  auto post_start = Clock::now();
  Vector y_new = line_search_y(*inst_.problem, state_.y, res.z);
  double fy_new = inst_.problem->evaluate_full(y_new);
  double fy_old = inst_.problem->evaluate_full(state_.y);
  if (!(fy_new <= fy_old)) {
    y_new = state_.y;
    fy_new = fy_old;
  }

  // Keep the best certificate seen; a budget-exhausted subproblem may
  // return a weaker bound than the previous iteration's.
  if (res.lb.min_value() >= lb_min_monotone_ - 1e-12 * (1.0 + std::abs(lb_min_monotone_))) {
    state_.lb_model = res.lb;
    state_.x = res.x;
    lb_min_monotone_ = std::max(lb_min_monotone_, res.lb.min_value());
  }
  state_.z = res.z;
  state_.y = y_new;
  double gap_new = fy_new - lb_min_monotone_;
  if (gap_new < 0.0) gap_new = 0.0;
  state_.gap = std::min(gap_new, state_.gap);
  prev_assignment_ = assignment;
  state_.assignment = std::move(assignment);
  state_.t = t;

  double t_setup = t_setup_pre + seconds_since(post_start);
  TuningModel::IterationSample sample;
  sample.t_setup = t_setup;
  sample.t_solve = t_solve;
  sample.eps_used = t == 1 ? std::min(res.achieved_eps, 1.0) : eps;
  sample.problem_size = ps;
  sample.eps_hat = res.achieved_eps;
  sample.gap_ratio = ctx.gap_prev > 0.0 ? state_.gap / ctx.gap_prev : 0.0;
  sample.xi_used = xi;
  tuner_.record(sample);

  rec.eps = t == 1 ? res.achieved_eps : eps;
  rec.eps_hat = res.achieved_eps;
  rec.eps_effective = std::max(res.achieved_eps, res.dual_shortfall);
  rec.gap = state_.gap;
  rec.full_objective = fy_new;
  rec.ws_size = static_cast<int>(collapsed.working.size());
  rec.problem_size = ps;
  rec.t_setup = t_setup;
  rec.t_solve = t_solve;
  rec.budget_exhausted = res.budget_exhausted;

  converged_ = state_.gap <= opts_.rel_tol * (1.0 + std::abs(fy_new));
  return rec;
}

EngineResult WorkingSetEngine::run(const Callback& cb) {
  EngineResult out;
  while (!converged_ && state_.t < opts_.max_iterations) {
    IterationRecord rec = run_iteration();
    out.log.push_back(rec);
    if (cb) cb(rec, *this);
  }
  out.y = state_.y;
  out.x = state_.x;
  out.gap = state_.gap;
  out.iterations = state_.t;
  out.converged = converged_;
  return out;
}

}  // namespace blitzws
