#include "blitzws/preprocess.hpp"

#include <cmath>

namespace blitzws {

PreprocessResult preprocess(const SparseColumnMatrix& m, const PreprocessOptions& opts) {
  PreprocessResult out;
  out.original_cols = m.cols();
  int n = m.rows();
  std::vector<SparseVec> cols;
  for (int i = 0; i < m.cols(); ++i) {
    const SparseVec& col = m.col(i);
    if (col.nnz() < opts.min_nnz) {
      ++out.dropped_low_nnz;
      continue;
    }
    double s1 = 0.0, s2 = 0.0;
    for (double v : col.val) {
      s1 += v;
      s2 += v * v;
    }
    double variance = (s2 - s1 * s1 / n) / n;
    double scale = 1.0;
    if (opts.standardize) {
      if (variance <= 1e-24) {
        ++out.dropped_zero_variance;
        continue;
      }
      scale = 1.0 / std::sqrt(variance);
    }
    SparseVec scaled = scale == 1.0 ? col : SparseVec::scaled(col, scale);
    cols.push_back(std::move(scaled));
    out.kept.push_back(i);
    out.scale.push_back(scale);
  }
  if (opts.add_bias_column) {
    SparseVec ones;
    for (int j = 0; j < n; ++j) ones.push_back(j, 1.0);
    cols.push_back(std::move(ones));
    out.kept.push_back(m.cols());
    out.scale.push_back(1.0);
  }
  out.matrix = SparseColumnMatrix(n, std::move(cols));
  return out;
}

Vector PreprocessResult::translate_solution(const Vector& omega_kept) const {
  int total = original_cols;
  for (int k : kept) total = std::max(total, k + 1);
  Vector omega = Vector::Zero(total);
  for (std::size_t k = 0; k < kept.size(); ++k) omega[kept[k]] = omega_kept[k] * scale[k];
  return omega;
}

}  // namespace blitzws
