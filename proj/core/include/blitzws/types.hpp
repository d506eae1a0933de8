#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace blitzws {

using Vector = Eigen::VectorXd;
using Index = std::int32_t;

/// Thrown when a caller violates an operation's preconditions
/// (dimension mismatch, parameter out of range, malformed input).
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

/// Sparse vector in coordinate form, indices strictly increasing.
struct SparseVec {
  std::vector<Index> idx;
  std::vector<double> val;

  int nnz() const { return static_cast<int>(idx.size()); }
  bool empty() const { return idx.empty(); }

  double dot(const Vector& x) const {
    double s = 0.0;
    for (std::size_t k = 0; k < idx.size(); ++k) s += val[k] * x[idx[k]];
    return s;
  }

  /// x += a * this
  void add_to(double a, Vector& x) const {
    for (std::size_t k = 0; k < idx.size(); ++k) x[idx[k]] += a * val[k];
  }

  double squared_norm() const {
    double s = 0.0;
    for (double v : val) s += v * v;
    return s;
  }
  double norm() const;

  void push_back(Index i, double v) {
    idx.push_back(i);
    val.push_back(v);
  }

  Vector to_dense(int n) const {
    Vector out = Vector::Zero(n);
    add_to(1.0, out);
    return out;
  }

  static SparseVec from_dense(const Vector& x, double drop_below = 0.0);
  static SparseVec scaled(const SparseVec& a, double s);
};

/// Column-major sparse matrix with cached per-column norms and nonzero
/// counts.  Row indices are strictly increasing within each column.
class SparseColumnMatrix {
 public:
  SparseColumnMatrix() = default;
  SparseColumnMatrix(int n_rows, std::vector<SparseVec> columns);

  int rows() const { return n_rows_; }
  int cols() const { return static_cast<int>(cols_.size()); }

  const SparseVec& col(int i) const { return cols_[i]; }
  double col_norm(int i) const { return col_norms_[i]; }
  double col_squared_norm(int i) const { return col_norms_[i] * col_norms_[i]; }
  int col_nnz(int i) const { return cols_[i].nnz(); }
  std::int64_t total_nnz() const;

  /// A^T x restricted to the given columns.
  Vector transpose_dot(const Vector& x, const std::vector<int>& columns) const;

  /// Rescales column i in place and refreshes its cached norm.
  void scale_col(int i, double s);

  /// Recomputed-vs-cached norm consistency, relative 1e-12.
  bool norms_consistent() const;

 private:
  int n_rows_ = 0;
  std::vector<SparseVec> cols_;
  std::vector<double> col_norms_;
};

}  // namespace blitzws
