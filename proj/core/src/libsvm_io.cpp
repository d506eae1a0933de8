#include "blitzws/libsvm_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace blitzws {

namespace {

double parse_double(const std::string& tok, int line) {
  std::size_t pos = 0;
  double v;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    throw ParseError("non-numeric token '" + tok + "'", line);
  }
  if (pos != tok.size()) throw ParseError("non-numeric token '" + tok + "'", line);
  return v;
}

}  // namespace

LibsvmData read_libsvm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);

  std::vector<double> labels;
  std::vector<std::vector<std::pair<int, double>>> by_feature;
  std::string line;
  int line_no = 0;
  int example = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string tok;
    if (!(ss >> tok)) continue;  // blank line
    if (tok[0] == '#') continue;
    labels.push_back(parse_double(tok, line_no));
    int prev_idx = 0;
    while (ss >> tok) {
      auto colon = tok.find(':');
      if (colon == std::string::npos) throw ParseError("expected idx:val, got '" + tok + "'", line_no);
      std::string idx_s = tok.substr(0, colon);
      int idx;
      try {
        std::size_t pos = 0;
        idx = std::stoi(idx_s, &pos);
        if (pos != idx_s.size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw ParseError("non-numeric index '" + idx_s + "'", line_no);
      }
      if (idx <= prev_idx)
        throw ParseError("indices must be strictly increasing (got " + idx_s + ")", line_no);
      prev_idx = idx;
      double val = parse_double(tok.substr(colon + 1), line_no);
      if (static_cast<int>(by_feature.size()) < idx) by_feature.resize(idx);
      by_feature[idx - 1].emplace_back(example, val);
    }
    ++example;
  }
  if (example == 0) throw ParseError("empty file", line_no);

  std::vector<SparseVec> cols(by_feature.size());
  for (std::size_t i = 0; i < by_feature.size(); ++i) {
    for (const auto& [row, val] : by_feature[i]) cols[i].push_back(row, val);
  }
  LibsvmData out{SparseColumnMatrix(example, std::move(cols)),
                 Eigen::Map<Vector>(labels.data(), static_cast<Eigen::Index>(labels.size()))};
  return out;
}

void write_libsvm(const std::string& path, const SparseColumnMatrix& features,
                  const Vector& labels) {
  int n = features.rows();
  std::vector<std::vector<std::pair<int, double>>> rows(n);
  for (int i = 0; i < features.cols(); ++i) {
    const SparseVec& col = features.col(i);
    for (int t = 0; t < col.nnz(); ++t) rows[col.idx[t]].emplace_back(i + 1, col.val[t]);
  }
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw UsageError("cannot write " + path);
  for (int j = 0; j < n; ++j) {
    std::fprintf(f, "%.17g", labels[j]);
    for (const auto& [idx, val] : rows[j]) std::fprintf(f, " %d:%.17g", idx, val);
    std::fputc('\n', f);
  }
  std::fclose(f);
}

}  // namespace blitzws
