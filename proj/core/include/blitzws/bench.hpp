#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "blitzws/preprocess.hpp"
#include "blitzws/problems.hpp"

namespace blitzws {

struct RunConfig {
  TaskKind task = TaskKind::Lasso;
  std::string data_path;
  std::optional<double> lambda;        // absolute weight
  std::optional<double> lambda_ratio;  // fraction of lambda_max
  std::optional<double> C;             // SVM cost
  std::string arm = "blitzws";         // blitzws | plain | plain+screen | plain+gapsafe
  double tol = 1e-6;
  std::uint64_t seed = 0;
  std::string out_path;
  bool bias = false;
  PreprocessOptions prep;
  int n_groups = 0;  // contiguous grouping when no manifest is present
  int max_epochs = 200000;
  int max_iterations = 500;
  int screen_every = 5;  // plain-arm screening cadence, in epochs
};

struct LogRecord {
  int t = 0;
  double wall_seconds = 0.0;
  double rel_subopt = 0.0;
  int ws_size = 0;
  double xi = 0.0;
  double eps = 0.0;
  int screened_count = 0;
};

struct BenchResult {
  std::vector<LogRecord> log;
  double objective = 0.0;
  double reference_objective = 0.0;
  double rel_subopt = 0.0;
  std::int64_t work_nnz = 0;
  int iterations = 0;
  double resolved_lambda = 0.0;
  std::string summary_text;
  std::string summary_json;
};

/// Reads the data file, applies preprocessing, resolves the regularization
/// weight (ratio presets resolve against lambda_max), and builds the task
/// instance.  Group structure comes from <data>.manifest.json when present,
/// otherwise from a contiguous partition into cfg.n_groups blocks.
Instance load_instance(const RunConfig& cfg, double* resolved_lambda = nullptr);

/// Reference optimum at certificate gap <= gap_tol * (1 + |f|), cached next
/// to the data file keyed by the data bytes, task, weight, and
/// preprocessing flags.
double reference_objective(const Instance& inst, const RunConfig& cfg, double gap_tol = 1e-12);

/// Reference solve without caching; returns the metric objective and
/// optionally the model.
double solve_reference(const Instance& inst, double gap_tol = 1e-12, Vector* model = nullptr,
                       int max_passes = 400000);

BenchResult run_benchmark(const RunConfig& cfg);

void write_log_file(const std::string& path, const std::vector<LogRecord>& log,
                    const std::string& summary_json);

/// Regularization weight at which the given fraction of groups is active,
/// found by bisection over reference solves.  The matrix is standardized
/// in place first.
double find_group_lambda(std::shared_ptr<SparseColumnMatrix> features, const Vector& labels,
                         const std::vector<std::vector<int>>& groups, double target_frac,
                         bool add_bias = false);

}  // namespace blitzws
