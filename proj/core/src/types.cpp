#include "blitzws/types.hpp"

#include <cmath>

namespace blitzws {

double SparseVec::norm() const { return std::sqrt(squared_norm()); }

SparseVec SparseVec::from_dense(const Vector& x, double drop_below) {
  SparseVec out;
  for (int i = 0; i < x.size(); ++i) {
    if (std::abs(x[i]) > drop_below) out.push_back(static_cast<Index>(i), x[i]);
  }
  return out;
}

SparseVec SparseVec::scaled(const SparseVec& a, double s) {
  SparseVec out = a;
  for (double& v : out.val) v *= s;
  return out;
}

SparseColumnMatrix::SparseColumnMatrix(int n_rows, std::vector<SparseVec> columns)
    : n_rows_(n_rows), cols_(std::move(columns)) {
  col_norms_.resize(cols_.size());
  for (std::size_t j = 0; j < cols_.size(); ++j) {
    const SparseVec& c = cols_[j];
    Index prev = -1;
    for (Index i : c.idx) {
      if (i <= prev || i < 0 || i >= n_rows_)
        throw UsageError("SparseColumnMatrix: row indices must be strictly increasing and in range");
      prev = i;
    }
    col_norms_[j] = c.norm();
  }
}

std::int64_t SparseColumnMatrix::total_nnz() const {
  std::int64_t s = 0;
  for (const auto& c : cols_) s += c.nnz();
  return s;
}

Vector SparseColumnMatrix::transpose_dot(const Vector& x, const std::vector<int>& columns) const {
  Vector out(columns.size());
  for (std::size_t k = 0; k < columns.size(); ++k) out[k] = cols_[columns[k]].dot(x);
  return out;
}

void SparseColumnMatrix::scale_col(int i, double s) {
  for (double& v : cols_[i].val) v *= s;
  col_norms_[i] = cols_[i].norm();
}

bool SparseColumnMatrix::norms_consistent() const {
  for (std::size_t j = 0; j < cols_.size(); ++j) {
    double fresh = cols_[j].norm();
    double cached = col_norms_[j];
    if (std::abs(fresh - cached) > 1e-12 * (1.0 + std::abs(fresh))) return false;
  }
  return true;
}

}  // namespace blitzws
