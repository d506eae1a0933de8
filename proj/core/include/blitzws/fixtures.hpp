#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "blitzws/types.hpp"

namespace blitzws {

/// Deterministic synthetic data sets.  The generator uses its own uniform
/// and Gaussian samplers on top of a fixed-width engine so that a seed
/// yields the same bytes everywhere.
struct FixtureSpec {
  std::string kind;  // lasso | logreg | grouplasso | svm
  std::uint64_t seed = 0;
  int n_examples = 200;
  int n_features = 100;
  int n_groups = 10;          // grouplasso
  double density = 0.1;       // design sparsity
  double support_frac = 0.1;  // planted nonzero fraction
  double noise = 0.1;
  double label_flip = 0.05;   // svm
};

struct Fixture {
  SparseColumnMatrix features;  // column per feature
  Vector labels;
  std::vector<std::vector<int>> groups;
  Vector planted;  // generating weights
  std::string manifest_json;
};

Fixture make_fixture(const FixtureSpec& spec);

/// Writes <stem>.svm and <stem>.manifest.json.
void write_fixture(const std::string& stem, const Fixture& fx);

/// Portable uniform/Gaussian sampling for tests and fixtures.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  std::uint64_t next_u64();
  double uniform();                    // [0, 1)
  double uniform(double lo, double hi);
  double gaussian();                   // Box-Muller
  int uniform_int(int n);              // [0, n)

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace blitzws
