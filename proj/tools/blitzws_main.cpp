// Command line interface: solve a task with the working-set engine, run a
// one-shot screening report, orchestrate benchmark arms, or generate
// synthetic fixtures.  BLITZWS_THREADS controls the parallel working-set
// scans.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "blitzws/bench.hpp"
#include "blitzws/engine.hpp"
#include "blitzws/fixtures.hpp"
#include "blitzws/screening.hpp"
#include "blitzws/solvers.hpp"

namespace {

using namespace blitzws;

struct CommonArgs {
  std::string task = "lasso";
  std::string data;
  double lambda = -1.0;
  double lambda_ratio = -1.0;
  double C = -1.0;
  double tol = 1e-6;
  std::uint64_t seed = 0;
  std::string out;
  bool bias = false;
  bool no_standardize = false;
  int min_nnz = 10;
  int n_groups = 0;
};

void add_common(CLI::App* cmd, CommonArgs* args) {
  cmd->add_option("--task", args->task, "lasso | logreg | grouplasso | svm");
  cmd->add_option("--data", args->data, "libsvm-format data file")->required();
  cmd->add_option("--lambda", args->lambda, "absolute regularization weight");
  cmd->add_option("--lambda-ratio", args->lambda_ratio,
                  "weight as a fraction of lambda_max (presets 0.2, 0.02, 0.002)");
  cmd->add_option("--C", args->C, "SVM cost parameter");
  cmd->add_option("--tol", args->tol, "target relative suboptimality");
  cmd->add_option("--seed", args->seed, "random seed");
  cmd->add_option("--out", args->out, "output path for logs");
  cmd->add_flag("--bias", args->bias, "include an unregularized bias term");
  cmd->add_flag("--no-standardize", args->no_standardize, "skip unit-variance scaling");
  cmd->add_option("--min-nnz", args->min_nnz, "drop features with fewer nonzeros");
  cmd->add_option("--n-groups", args->n_groups, "group count when no manifest exists");
}

RunConfig to_config(const CommonArgs& args, const std::string& arm) {
  RunConfig cfg;
  cfg.task = task_from_name(args.task);
  cfg.data_path = args.data;
  if (args.lambda > 0.0) cfg.lambda = args.lambda;
  if (args.lambda_ratio > 0.0) cfg.lambda_ratio = args.lambda_ratio;
  if (args.C > 0.0) cfg.C = args.C;
  cfg.arm = arm;
  cfg.tol = args.tol;
  cfg.seed = args.seed;
  cfg.out_path = args.out;
  cfg.bias = args.bias;
  cfg.prep.standardize = !args.no_standardize;
  cfg.prep.min_nnz = args.min_nnz;
  cfg.n_groups = args.n_groups;
  return cfg;
}

int cmd_solve(const CommonArgs& args) {
  RunConfig cfg = to_config(args, "blitzws");
  BenchResult res = run_benchmark(cfg);
  std::cout << res.summary_text;
  return res.rel_subopt <= cfg.tol ? 0 : 1;
}

int cmd_bench(const CommonArgs& args, const std::string& arm) {
  RunConfig cfg = to_config(args, arm);
  BenchResult res = run_benchmark(cfg);
  std::cout << res.summary_text;
  std::printf("%6s %12s %12s %8s %10s\n", "t", "wall_s", "rel_subopt", "ws", "screened");
  for (const LogRecord& r : res.log) {
    std::printf("%6d %12.4e %12.4e %8d %10d\n", r.t, r.wall_seconds, r.rel_subopt, r.ws_size,
                r.screened_count);
  }
  return 0;
}

int cmd_screen(const CommonArgs& args, int warm_epochs) {
  RunConfig cfg = to_config(args, "plain");
  double weight = 0.0;
  Instance inst = load_instance(cfg, &weight);

  auto solver = inst.make_solver();
  Assignment full = Assignment::all_full(inst.problem->term_count());
  auto collapsed = inst.problem->collapse(full);
  LowerBoundModel lb0 = inst.initial_lower_bound();
  Vector x0 = lb0.minimizer();
  Vector y0 = inst.initial_feasible();
  SubproblemContext ctx;
  ctx.problem = inst.problem.get();
  ctx.assignment = &full;
  ctx.collapsed = &collapsed;
  ctx.gap_prev = 1e300;
  ctx.prev_lb_min = -1e300;
  ctx.x_prev = &x0;
  ctx.feasible_seed = &y0;
  SolverBudget budget;
  budget.max_passes = warm_epochs;
  SubproblemResult res = solver->solve(ctx, budget);

  double gap = std::max(res.subgap, 0.0);
  ScreenOutcome blitz = blitz_screen(*inst.problem, SafeRegion::blitz(res.x, res.z, gap));
  ScreenOutcome gapsafe = blitz_screen(*inst.problem, SafeRegion::gap_safe(res.z, gap));
  std::cout << "task=" << task_name(cfg.task) << " weight=" << weight
            << " warm_epochs=" << warm_epochs << " gap=" << gap << "\n"
            << "screened(blitz)=" << blitz.screened_count
            << " screened(gap-safe)=" << gapsafe.screened_count << " of "
            << inst.problem->term_count() << " terms\n";
  return 0;
}

int cmd_fixture(const FixtureSpec& spec, const std::string& out_stem) {
  Fixture fx = make_fixture(spec);
  write_fixture(out_stem, fx);
  std::cout << "wrote " << out_stem << ".svm (" << fx.features.rows() << " examples, "
            << fx.features.cols() << " features)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Working-set convex optimization benchmark suite"};
  app.require_subcommand(1);

  CommonArgs solve_args, bench_args, screen_args;
  std::string bench_arm = "blitzws";
  int warm_epochs = 10;

  CLI::App* solve = app.add_subcommand("solve", "solve one instance with the working-set engine");
  add_common(solve, &solve_args);

  CLI::App* bench = app.add_subcommand("bench", "run one benchmark arm with convergence logging");
  add_common(bench, &bench_args);
  bench->add_option("--arm", bench_arm, "blitzws | plain | plain+screen | plain+gapsafe");

  CLI::App* screen = app.add_subcommand("screen", "one-shot safe screening report");
  add_common(screen, &screen_args);
  screen->add_option("--warm-epochs", warm_epochs, "solver epochs before screening");

  CLI::App* fixture = app.add_subcommand("fixture", "generate a synthetic data set");
  FixtureSpec spec;
  std::string out_stem = "fixture";
  fixture->add_option("--kind", spec.kind, "lasso | logreg | grouplasso | svm")->required();
  fixture->add_option("--seed", spec.seed, "generator seed");
  fixture->add_option("--n", spec.n_examples, "number of examples");
  fixture->add_option("--m", spec.n_features, "number of features");
  fixture->add_option("--groups", spec.n_groups, "number of groups");
  fixture->add_option("--density", spec.density, "design density");
  fixture->add_option("--support", spec.support_frac, "planted support fraction");
  fixture->add_option("--noise", spec.noise, "label noise scale");
  fixture->add_option("--out", out_stem, "output stem");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve(solve_args);
    if (bench->parsed()) return cmd_bench(bench_args, bench_arm);
    if (screen->parsed()) return cmd_screen(screen_args, warm_epochs);
    if (fixture->parsed()) return cmd_fixture(spec, out_stem);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
