#include "blitzws/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace blitzws {

namespace {

std::vector<double> log_spaced(double lo, double hi, int n) {
  std::vector<double> out(n);
  double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < n; ++i) out[i] = std::exp(llo + (lhi - llo) * i / (n - 1.0));
  out.front() = lo;
  out.back() = hi;
  return out;
}

void push_capped(std::deque<double>& h, double v, std::size_t cap) {
  h.push_back(v);
  while (h.size() > cap) h.pop_front();
}

}  // namespace

double median_of(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

const std::vector<double>& TuningModel::xi_grid() {
  static const std::vector<double> grid = log_spaced(kXiMin, kXiMax, kXiGridSize);
  return grid;
}

const std::vector<double>& TuningModel::eps_grid() {
  static const std::vector<double> grid = log_spaced(kEpsMin, kEpsMax, kEpsGridSize);
  return grid;
}

void TuningModel::record(const IterationSample& s) {
  push_capped(setup_history_, s.t_setup, 5);
  if (s.problem_size > 0 && s.eps_used > 0.0)
    push_capped(solve_history_, s.t_solve * s.eps_used / static_cast<double>(s.problem_size), 5);
  double denom = (1.0 - s.eps_hat) * s.xi_used;
  if (denom > 1e-12)
    push_capped(progress_history_, (1.0 - s.gap_ratio) / denom, 2);
}

double TuningModel::c_setup() const {
  return median_of({setup_history_.begin(), setup_history_.end()});
}

double TuningModel::c_solve() const {
  return median_of({solve_history_.begin(), solve_history_.end()});
}

double TuningModel::c_progress() const {
  if (progress_history_.empty()) return 1.0;
  return std::max(1.0, median_of({progress_history_.begin(), progress_history_.end()}));
}

TuningModel::Choice TuningModel::choose(const std::vector<std::int64_t>& problem_size_by_xi) const {
  const auto& xis = xi_grid();
  const auto& epss = eps_grid();
  double cs = c_setup();
  double cv = c_solve();
  double cp = c_progress();

  Choice best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int xi_i = 0; xi_i < kXiGridSize; ++xi_i) {
    double xi = xis[xi_i];
    double ps = static_cast<double>(problem_size_by_xi[xi_i]);
    for (int ei = 0; ei < kEpsGridSize; ++ei) {
      double eps = epss[ei];
      double t_hat = cs + cv * ps / eps;
      double ratio = std::max((1.0 - (1.0 - eps) * xi * cp), eps);
      ratio = std::max(ratio, 1e-16);
      double score = -std::log(ratio) / std::max(t_hat, 1e-12);
      if (score > best_score) {
        best_score = score;
        best = Choice{xi, eps, xi_i, ei};
      }
    }
  }
  return best;
}

}  // namespace blitzws
