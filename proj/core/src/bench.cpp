#include "blitzws/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "blitzws/capsule.hpp"
#include "blitzws/engine.hpp"
#include "blitzws/libsvm_io.hpp"
#include "blitzws/screening.hpp"
#include "blitzws/solvers.hpp"

namespace blitzws {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 1469598103934665603ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return 0;
  std::uint64_t h = 1469598103934665603ull;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    h = fnv1a(buf, static_cast<std::size_t>(in.gcount()), h);
    if (!in) break;
  }
  return h;
}

std::vector<std::vector<int>> load_groups(const RunConfig& cfg, int n_features) {
  // Manifest written by the fixture generator; fall back to contiguous
  // blocks when absent.
  std::ifstream mf(cfg.data_path + ".manifest.json");
  int n_groups = cfg.n_groups;
  if (mf) {
    std::string text((std::istreambuf_iterator<char>(mf)), std::istreambuf_iterator<char>());
    auto pos = text.find("\"n_groups\"");
    if (pos != std::string::npos) {
      pos = text.find(':', pos);
      if (pos != std::string::npos) n_groups = std::atoi(text.c_str() + pos + 1);
    }
  }
  if (n_groups <= 0) n_groups = std::max(1, n_features / 10);
  n_groups = std::min(n_groups, n_features);
  std::vector<std::vector<int>> groups(n_groups);
  for (int i = 0; i < n_features; ++i) groups[i * n_groups / n_features].push_back(i);
  return groups;
}

double resolve_weight(const RunConfig& cfg, const SparseColumnMatrix& features,
                      const Vector& labels) {
  if (cfg.task == TaskKind::Svm) {
    if (!cfg.C) throw UsageError("svm requires --C");
    return *cfg.C;
  }
  if (cfg.lambda && cfg.lambda_ratio)
    throw UsageError("give exactly one of --lambda and --lambda-ratio");
  if (cfg.lambda) return *cfg.lambda;
  if (!cfg.lambda_ratio) throw UsageError("give exactly one of --lambda and --lambda-ratio");
  double lmax;
  if (cfg.task == TaskKind::GroupLasso) {
    auto groups = load_groups(cfg, features.cols());
    lmax = 0.0;
    for (const auto& g : groups) {
      double s = 0.0;
      for (int c : g) {
        double d = features.col(c).dot(labels);
        s += d * d;
      }
      lmax = std::max(lmax, std::sqrt(s));
    }
  } else {
    LossFunction loss{cfg.task == TaskKind::LogReg ? LossKind::Logistic : LossKind::Squared};
    lmax = compute_lambda_max(features, labels, loss);
  }
  if (lmax <= 0.0) throw UsageError("lambda_max is zero; ratio presets are undefined");
  return *cfg.lambda_ratio * lmax;
}

}  // namespace

Instance load_instance(const RunConfig& cfg, double* resolved_lambda) {
  LibsvmData data = read_libsvm(cfg.data_path);
  PreprocessResult prep = preprocess(data.features, cfg.prep);
  auto mat = std::make_shared<SparseColumnMatrix>(std::move(prep.matrix));

  double weight = resolve_weight(cfg, *mat, data.labels);
  if (resolved_lambda) *resolved_lambda = weight;

  switch (cfg.task) {
    case TaskKind::Lasso:
      return build_l1_dual(mat, data.labels, LossKind::Squared, weight, {cfg.bias});
    case TaskKind::LogReg:
      return build_l1_dual(mat, data.labels, LossKind::Logistic, weight, {cfg.bias});
    case TaskKind::GroupLasso: {
      auto groups = load_groups(cfg, mat->cols());
      return build_group_dual(mat, data.labels, std::move(groups), weight, {cfg.bias, true});
    }
    case TaskKind::Svm: {
      auto examples = std::make_shared<SparseColumnMatrix>(transpose(*mat));
      return build_svm_primal(examples, data.labels, weight);
    }
    case TaskKind::MinNorm:
      return build_min_norm(mat, data.labels);
  }
  throw UsageError("unsupported task");
}

double solve_reference(const Instance& inst, double gap_tol, Vector* model, int max_passes) {
  auto solver = inst.make_solver();
  Assignment full = Assignment::all_full(inst.problem->term_count());
  PiecewiseProblem::Collapsed collapsed = inst.problem->collapse(full);
  LowerBoundModel lb0 = inst.initial_lower_bound();
  Vector y0 = inst.initial_feasible();

  SubproblemContext ctx;
  ctx.problem = inst.problem.get();
  ctx.assignment = &full;
  ctx.collapsed = &collapsed;
  ctx.gap_prev = 1e300;
  ctx.prev_lb_min = lb0.min_value();
  Vector x0 = lb0.minimizer();
  ctx.x_prev = &x0;
  ctx.feasible_seed = &y0;

  SubproblemResult res;
  int done = 0;
  while (done < max_passes) {
    SolverBudget budget;
    budget.eps_target = 0.0;
    budget.max_passes = std::min(50, max_passes - done);
    res = solver->solve(ctx, budget);
    done += res.passes;
    double scale = 1.0 + std::abs(res.f_t_at_z);
    if (res.subgap <= gap_tol * scale) break;
  }
  Vector m = inst.task == TaskKind::Svm || inst.task == TaskKind::MinNorm
                 ? res.z
                 : solver->primal_model();
  if (model) *model = m;
  return inst.metric_objective(m);
}

double reference_objective(const Instance& inst, const RunConfig& cfg, double gap_tol) {
  std::uint64_t key = file_hash(cfg.data_path);
  key = fnv1a(&inst.lambda, sizeof(inst.lambda), key);
  int task_tag = static_cast<int>(cfg.task);
  key = fnv1a(&task_tag, sizeof(task_tag), key);
  key = fnv1a(&cfg.prep.standardize, sizeof(bool), key);
  key = fnv1a(&cfg.prep.min_nnz, sizeof(int), key);
  key = fnv1a(&cfg.bias, sizeof(bool), key);

  std::ostringstream name;
  name << cfg.data_path << ".ref-" << std::hex << key << ".txt";
  std::ifstream in(name.str());
  if (in) {
    double v;
    if (in >> v) return v;
  }
  double v = solve_reference(inst, gap_tol);
  std::ofstream out(name.str());
  if (out) out.precision(17), out << v << "\n";
  return v;
}

namespace {

struct ArmRunner {
  const Instance& inst;
  const RunConfig& cfg;
  double ref;
  BenchResult result;
  Clock::time_point start = Clock::now();
  double last_wall = 0.0;

  void log_point(int t, double obj, int ws, double xi, double eps, int screened) {
    LogRecord rec;
    rec.t = t;
    rec.wall_seconds = std::max(seconds_since(start), last_wall + 1e-9);
    last_wall = rec.wall_seconds;
    double denom = std::max(std::abs(ref), 1e-12);
    rec.rel_subopt = (obj - ref) / denom;
    rec.ws_size = ws;
    rec.xi = xi;
    rec.eps = eps;
    rec.screened_count = screened;
    result.log.push_back(rec);
    result.objective = obj;
    result.rel_subopt = rec.rel_subopt;
    result.iterations = t;
  }
};

double metric_of(const Instance& inst, const WorkingSetEngine& engine, SubproblemSolver& solver) {
  if (inst.task == TaskKind::Svm || inst.task == TaskKind::MinNorm)
    return inst.metric_objective(engine.state().y);
  return inst.metric_objective(solver.primal_model());
}

void run_blitzws_arm(ArmRunner& r) {
  EngineOptions opts;
  opts.rel_tol = 1e-14;  // the benchmark's own tolerance decides
  opts.max_iterations = r.cfg.max_iterations;
  WorkingSetEngine engine(r.inst, opts);
  while (!engine.converged() && engine.state().t < r.cfg.max_iterations) {
    IterationRecord rec = engine.run_iteration();
    double obj = metric_of(r.inst, engine, engine.solver());
    r.log_point(rec.t, obj, rec.ws_size, rec.xi, rec.eps, 0);
    if (r.result.rel_subopt <= r.cfg.tol) break;
  }
  r.result.work_nnz = engine.solver().work_nnz();
}

void run_plain_arm(ArmRunner& r, bool screen, bool gap_safe) {
  const Instance& inst = r.inst;
  auto solver = inst.make_solver();
  int m = inst.problem->term_count();
  Assignment assign = Assignment::all_full(m);
  LowerBoundModel lb0 = inst.initial_lower_bound();
  Vector x0 = lb0.minimizer();
  Vector y0 = inst.initial_feasible();
  int screened = 0;
  int epoch = 0;

  while (epoch < r.cfg.max_epochs) {
    PiecewiseProblem::Collapsed collapsed = inst.problem->collapse(assign);
    SubproblemContext ctx;
    ctx.problem = inst.problem.get();
    ctx.assignment = &assign;
    ctx.collapsed = &collapsed;
    ctx.gap_prev = 1e300;
    ctx.prev_lb_min = -1e300;
    ctx.x_prev = &x0;
    ctx.feasible_seed = &y0;
    SolverBudget budget;
    budget.eps_target = 0.0;
    budget.max_passes = r.cfg.screen_every;
    SubproblemResult res = solver->solve(ctx, budget);
    epoch += res.passes;

    double obj = inst.task == TaskKind::Svm || inst.task == TaskKind::MinNorm
                     ? inst.metric_objective(res.z)
                     : inst.metric_objective(solver->primal_model());
    r.log_point(epoch, obj, m - screened, 0.0, 0.0, screened);
    if (r.result.rel_subopt <= r.cfg.tol) break;

    if (screen) {
      double gap = std::max(res.subgap, 0.0);
      SafeRegion region = gap_safe ? SafeRegion::gap_safe(res.z, gap)
                                   : SafeRegion::blitz(res.x, res.z, gap);
      for (int i = 0; i < m; ++i) {
        if (assign.piece[i] != Assignment::kFull) continue;
        const PiecewiseTerm& term = inst.problem->term(i);
        int k = term.partition(region.center);
        if (!subfunction_is_linear(term.piece(k).fn)) continue;
        if (ball_inside_subdomain(region.center, region.radius, term.piece(k).dom)) {
          assign.piece[i] = static_cast<Index>(k);
          ++screened;
        }
      }
    }
  }
  r.result.work_nnz = solver->work_nnz();
}

}  // namespace

BenchResult run_benchmark(const RunConfig& cfg) {
  double weight = 0.0;
  Instance inst = load_instance(cfg, &weight);
  double ref = reference_objective(inst, cfg);

  ArmRunner runner{inst, cfg, ref, {}};
  runner.result.reference_objective = ref;
  runner.result.resolved_lambda = weight;

  if (cfg.arm == "blitzws") {
    run_blitzws_arm(runner);
  } else if (cfg.arm == "plain") {
    run_plain_arm(runner, false, false);
  } else if (cfg.arm == "plain+screen") {
    run_plain_arm(runner, true, false);
  } else if (cfg.arm == "plain+gapsafe") {
    run_plain_arm(runner, true, true);
  } else {
    throw UsageError("unknown arm: " + cfg.arm);
  }

  BenchResult& out = runner.result;
  std::ostringstream table;
  table << "task=" << task_name(cfg.task) << " arm=" << cfg.arm << " weight=" << weight << "\n"
        << "iterations=" << out.iterations << " objective=" << out.objective
        << " reference=" << out.reference_objective << " rel_subopt=" << out.rel_subopt
        << " work_nnz=" << out.work_nnz << "\n";
  out.summary_text = table.str();

  std::ostringstream js;
  js.precision(17);
  js << "{\n  \"task\": \"" << task_name(cfg.task) << "\",\n  \"arm\": \"" << cfg.arm
     << "\",\n  \"weight\": " << weight << ",\n  \"iterations\": " << out.iterations
     << ",\n  \"objective\": " << out.objective
     << ",\n  \"reference_objective\": " << out.reference_objective
     << ",\n  \"rel_subopt\": " << out.rel_subopt << ",\n  \"work_nnz\": " << out.work_nnz
     << "\n}\n";
  out.summary_json = js.str();

  if (!cfg.out_path.empty()) write_log_file(cfg.out_path, out.log, out.summary_json);
  return out;
}

void write_log_file(const std::string& path, const std::vector<LogRecord>& log,
                    const std::string& summary_json) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path);
  out.precision(12);
  for (const LogRecord& r : log) {
    out << "t=" << r.t << " wall_seconds=" << r.wall_seconds << " rel_subopt=" << r.rel_subopt
        << " ws_size=" << r.ws_size << " xi=" << r.xi << " eps=" << r.eps
        << " screened_count=" << r.screened_count << "\n";
  }
  std::ofstream js(path + ".summary.json");
  if (js) js << summary_json;
}

double find_group_lambda(std::shared_ptr<SparseColumnMatrix> features, const Vector& labels,
                         const std::vector<std::vector<int>>& groups, double target_frac,
                         bool add_bias) {
  {
    // Standardize once; the search then builds with standardization off so
    // repeated builds see the same matrix.
    Instance warm = build_group_dual(features, labels, groups, 1.0, {add_bias, true});
  }
  double lmax = 0.0;
  for (const auto& g : groups) {
    double s = 0.0;
    for (int c : g) {
      double d = features->col(c).dot(labels);
      s += d * d;
    }
    lmax = std::max(lmax, std::sqrt(s));
  }
  int target = std::max(1, static_cast<int>(std::lround(target_frac * groups.size())));

  auto active_groups = [&](double lambda) {
    Instance inst = build_group_dual(features, labels, groups, lambda, {add_bias, false});
    Vector model;
    solve_reference(inst, 1e-10, &model, 100000);
    int active = 0;
    for (const auto& g : groups) {
      double s = 0.0;
      for (int c : g) s += model[c] * model[c];
      if (std::sqrt(s) > 1e-7) ++active;
    }
    return active;
  };

  double lo = 1e-3 * lmax, hi = lmax;
  double best = 0.5 * lmax;
  for (int it = 0; it < 14; ++it) {
    double mid = std::sqrt(lo * hi);
    int active = active_groups(mid);
    if (active == target) return mid;
    if (active > target)
      lo = mid;
    else
      hi = mid;
    best = mid;
  }
  return best;
}

}  // namespace blitzws
