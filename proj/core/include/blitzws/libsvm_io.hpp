#pragma once

#include <string>

#include "blitzws/types.hpp"

namespace blitzws {

class ParseError : public UsageError {
 public:
  ParseError(const std::string& what, int line)
      : UsageError(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct LibsvmData {
  SparseColumnMatrix features;  // column per feature, row per example
  Vector labels;
};

/// Text format, one example per line: "<label> <idx>:<val> ..." with
/// 1-based strictly increasing indices.  Malformed lines are rejected
/// with their line number.
LibsvmData read_libsvm(const std::string& path);

/// Inverse of read_libsvm; values are written with enough digits to
/// round-trip exactly.
void write_libsvm(const std::string& path, const SparseColumnMatrix& features,
                  const Vector& labels);

}  // namespace blitzws
