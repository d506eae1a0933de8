#include "blitzws/fixtures.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "blitzws/libsvm_io.hpp"

namespace blitzws {

std::uint64_t Rng::next_u64() {
  // splitmix64
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 1e-300) u1 = uniform();
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

int Rng::uniform_int(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

namespace {

SparseColumnMatrix sparse_gaussian_design(Rng& rng, int n, int m, double density) {
  std::vector<SparseVec> cols(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      if (rng.uniform() < density) cols[i].push_back(j, rng.gaussian());
    }
    if (cols[i].empty()) cols[i].push_back(rng.uniform_int(n), rng.gaussian());
  }
  return SparseColumnMatrix(n, std::move(cols));
}

Vector planted_weights(Rng& rng, int m, double support_frac) {
  Vector w = Vector::Zero(m);
  int support = std::max(1, static_cast<int>(m * support_frac));
  for (int k = 0; k < support; ++k) {
    int i = rng.uniform_int(m);
    w[i] = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.5, 2.0);
  }
  return w;
}

std::string manifest_for(const FixtureSpec& spec, int actual_features) {
  std::ostringstream os;
  os << "{\n"
     << "  \"kind\": \"" << spec.kind << "\",\n"
     << "  \"seed\": " << spec.seed << ",\n"
     << "  \"n_examples\": " << spec.n_examples << ",\n"
     << "  \"n_features\": " << actual_features << ",\n"
     << "  \"n_groups\": " << spec.n_groups << ",\n"
     << "  \"density\": " << spec.density << ",\n"
     << "  \"support_frac\": " << spec.support_frac << ",\n"
     << "  \"noise\": " << spec.noise << ",\n"
     << "  \"label_flip\": " << spec.label_flip << "\n"
     << "}\n";
  return os.str();
}

}  // namespace

Fixture make_fixture(const FixtureSpec& spec) {
  Rng rng(spec.seed);
  Fixture fx;
  int n = spec.n_examples, m = spec.n_features;

  if (spec.kind == "grouplasso") {
    // Tree-leaf structure: each group maps every example to exactly one of
    // its columns, so within-group columns have disjoint supports.
    int leaves = std::max(2, m / std::max(1, spec.n_groups));
    std::vector<SparseVec> cols(spec.n_groups * leaves);
    fx.groups.resize(spec.n_groups);
    for (int g = 0; g < spec.n_groups; ++g) {
      for (int l = 0; l < leaves; ++l) fx.groups[g].push_back(g * leaves + l);
      for (int j = 0; j < n; ++j) {
        int leaf = rng.uniform_int(leaves);
        cols[g * leaves + leaf].push_back(j, rng.uniform(0.5, 1.5));
      }
    }
    SparseColumnMatrix features(n, std::move(cols));
    Vector w = Vector::Zero(features.cols());
    int active_groups = std::max(1, static_cast<int>(spec.n_groups * spec.support_frac));
    for (int k = 0; k < active_groups; ++k) {
      int g = rng.uniform_int(spec.n_groups);
      for (int c : fx.groups[g]) w[c] = rng.gaussian();
    }
    Vector y = Vector::Zero(n);
    for (int i = 0; i < features.cols(); ++i)
      if (w[i] != 0.0) features.col(i).add_to(w[i], y);
    for (int j = 0; j < n; ++j) y[j] += spec.noise * rng.gaussian();
    fx.features = std::move(features);
    fx.labels = std::move(y);
    fx.planted = std::move(w);
    fx.manifest_json = manifest_for(spec, fx.features.cols());
    return fx;
  }

  SparseColumnMatrix features = sparse_gaussian_design(rng, n, m, spec.density);
  Vector w = planted_weights(rng, m, spec.support_frac);
  Vector signal = Vector::Zero(n);
  for (int i = 0; i < m; ++i)
    if (w[i] != 0.0) features.col(i).add_to(w[i], signal);

  Vector labels(n);
  if (spec.kind == "lasso") {
    for (int j = 0; j < n; ++j) labels[j] = signal[j] + spec.noise * rng.gaussian();
  } else if (spec.kind == "logreg" || spec.kind == "svm") {
    for (int j = 0; j < n; ++j) {
      double s = signal[j] + spec.noise * rng.gaussian();
      labels[j] = s >= 0.0 ? 1.0 : -1.0;
      if (spec.kind == "svm" && rng.uniform() < spec.label_flip) labels[j] = -labels[j];
    }
  } else {
    throw UsageError("unknown fixture kind: " + spec.kind);
  }

  fx.features = std::move(features);
  fx.labels = std::move(labels);
  fx.planted = std::move(w);
  fx.manifest_json = manifest_for(spec, fx.features.cols());
  return fx;
}

void write_fixture(const std::string& stem, const Fixture& fx) {
  write_libsvm(stem + ".svm", fx.features, fx.labels);
  std::ofstream mf(stem + ".manifest.json");
  if (!mf) throw UsageError("cannot write " + stem + ".manifest.json");
  mf << fx.manifest_json;
}

}  // namespace blitzws
