#pragma once

#include <vector>

#include "blitzws/types.hpp"

namespace blitzws {

struct PreprocessOptions {
  bool standardize = true;  // scale columns to unit variance
  int min_nnz = 10;         // drop columns with fewer nonzeros
  bool add_bias_column = false;
};

struct PreprocessResult {
  SparseColumnMatrix matrix;
  std::vector<int> kept;      // original index of each kept column
  std::vector<double> scale;  // multiplier applied to each kept column
  int dropped_low_nnz = 0;
  int dropped_zero_variance = 0;
  int original_cols = 0;

  /// Maps a solution over the kept (scaled) columns back to the original
  /// feature space.
  Vector translate_solution(const Vector& omega_kept) const;
};

PreprocessResult preprocess(const SparseColumnMatrix& m, const PreprocessOptions& opts = {});

}  // namespace blitzws
