#include "blitzws/libsvm_io.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "blitzws/bench.hpp"
#include "blitzws/fixtures.hpp"
#include "blitzws/preprocess.hpp"
#include "test_util.hpp"

namespace blitzws {
namespace {

namespace fs = std::filesystem;

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("blitzws_test_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write_text(const std::string& name, const std::string& text) {
    std::ofstream out(path(name));
    out << text;
  }

  fs::path dir_;
};

using LibsvmIo = TempDir;
using Fixtures = TempDir;
using Bench = TempDir;

TEST_F(LibsvmIo, ParsesBasicLines) {
  write_text("a.svm", "-1 3:0.5 7:1.2\n+1 1:2\n");
  LibsvmData data = read_libsvm(path("a.svm"));
  EXPECT_EQ(data.features.rows(), 2);
  EXPECT_EQ(data.features.cols(), 7);
  EXPECT_DOUBLE_EQ(data.labels[0], -1.0);
  EXPECT_DOUBLE_EQ(data.labels[1], 1.0);
  EXPECT_DOUBLE_EQ(data.features.col(2).val[0], 0.5);   // 1-based index 3
  EXPECT_DOUBLE_EQ(data.features.col(6).val[0], 1.2);
  EXPECT_DOUBLE_EQ(data.features.col(0).val[0], 2.0);
}

TEST_F(LibsvmIo, RejectsMalformedInput) {
  write_text("dup.svm", "1 1:1 1:2\n");
  EXPECT_THROW(read_libsvm(path("dup.svm")), ParseError);
  write_text("dec.svm", "1 3:1 2:2\n");
  EXPECT_THROW(read_libsvm(path("dec.svm")), ParseError);
  write_text("tok.svm", "1 a:1\n");
  EXPECT_THROW(read_libsvm(path("tok.svm")), ParseError);
  write_text("lbl.svm", "abc 1:1\n");
  EXPECT_THROW(read_libsvm(path("lbl.svm")), ParseError);
  write_text("empty.svm", "");
  EXPECT_THROW(read_libsvm(path("empty.svm")), ParseError);

  write_text("line2.svm", "1 1:1\n1 2:x\n");
  try {
    read_libsvm(path("line2.svm"));
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
  }
}

TEST_F(LibsvmIo, RoundTripsBitExactly) {
  Rng rng(141);
  SparseColumnMatrix m = testutil::random_sparse_matrix(rng, 12, 8, 0.4);
  Vector labels(12);
  for (int j = 0; j < 12; ++j) labels[j] = rng.gaussian();
  write_libsvm(path("rt.svm"), m, labels);
  LibsvmData back = read_libsvm(path("rt.svm"));
  ASSERT_EQ(back.features.rows(), 12);
  ASSERT_LE(back.features.cols(), 8);
  for (int j = 0; j < 12; ++j) EXPECT_EQ(back.labels[j], labels[j]);
  for (int i = 0; i < back.features.cols(); ++i) {
    const SparseVec& a = m.col(i);
    const SparseVec& b = back.features.col(i);
    ASSERT_EQ(a.nnz(), b.nnz());
    for (int t = 0; t < a.nnz(); ++t) {
      EXPECT_EQ(a.idx[t], b.idx[t]);
      EXPECT_EQ(a.val[t], b.val[t]);  // %.17g round-trips doubles
    }
  }
}

TEST(Preprocess, DropsLowNnzAndConstantColumns) {
  // Column 0: 9 nonzeros (dropped under the default threshold 10);
  // column 1: constant (zero variance, dropped); column 2 kept and scaled.
  std::vector<SparseVec> cols(3);
  for (int j = 0; j < 9; ++j) cols[0].push_back(j, 1.0 + j);
  for (int j = 0; j < 12; ++j) cols[1].push_back(j, 3.0);
  for (int j = 0; j < 12; ++j) cols[2].push_back(j, j % 4 == 0 ? 2.0 : -1.0);
  SparseColumnMatrix m(12, std::move(cols));
  PreprocessResult res = preprocess(m, {});
  EXPECT_EQ(res.dropped_low_nnz, 1);
  EXPECT_EQ(res.dropped_zero_variance, 1);
  ASSERT_EQ(res.matrix.cols(), 1);
  EXPECT_EQ(res.kept[0], 2);

  // Unit variance after scaling.
  const SparseVec& c = res.matrix.col(0);
  double s1 = 0.0, s2 = 0.0;
  for (double v : c.val) {
    s1 += v;
    s2 += v * v;
  }
  double var = (s2 - s1 * s1 / 12.0) / 12.0;
  EXPECT_NEAR(var, 1.0, 1e-9);
}

TEST(Preprocess, TranslateSolutionUndoesScaling) {
  Rng rng(142);
  SparseColumnMatrix m = testutil::random_sparse_matrix(rng, 30, 5, 0.9);
  PreprocessOptions opts;
  opts.min_nnz = 1;
  PreprocessResult res = preprocess(m, opts);
  ASSERT_EQ(res.matrix.cols(), 5);
  Vector omega_kept(5);
  for (int i = 0; i < 5; ++i) omega_kept[i] = rng.gaussian();

  Vector pred_scaled = Vector::Zero(30);
  for (int i = 0; i < 5; ++i) res.matrix.col(i).add_to(omega_kept[i], pred_scaled);
  Vector omega_orig = res.translate_solution(omega_kept);
  Vector pred_orig = Vector::Zero(30);
  for (int i = 0; i < 5; ++i) m.col(i).add_to(omega_orig[i], pred_orig);
  EXPECT_LT((pred_scaled - pred_orig).norm(), 1e-12);
}

TEST_F(Fixtures, SeededGenerationIsReproducibleByteForByte) {
  FixtureSpec spec;
  spec.kind = "lasso";
  spec.seed = 42;
  spec.n_examples = 50;
  spec.n_features = 30;
  Fixture f1 = make_fixture(spec);
  Fixture f2 = make_fixture(spec);
  write_fixture(path("one"), f1);
  write_fixture(path("two"), f2);

  auto slurp = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  };
  EXPECT_EQ(slurp(path("one.svm")), slurp(path("two.svm")));
  EXPECT_EQ(slurp(path("one.manifest.json")), slurp(path("two.manifest.json")));
  EXPECT_NE(slurp(path("one.svm")), "");
}

TEST_F(Fixtures, GroupFixtureHasDisjointWithinGroupSupports) {
  FixtureSpec spec;
  spec.kind = "grouplasso";
  spec.seed = 9;
  spec.n_examples = 60;
  spec.n_features = 24;
  spec.n_groups = 6;
  Fixture fx = make_fixture(spec);
  ASSERT_EQ(static_cast<int>(fx.groups.size()), 6);
  for (const auto& g : fx.groups) {
    std::set<Index> seen;
    for (int c : g) {
      for (Index r : fx.features.col(c).idx) {
        EXPECT_TRUE(seen.insert(r).second) << "row " << r << " duplicated within a group";
      }
    }
    // Tree-leaf structure: every example hits exactly one leaf per group.
    EXPECT_EQ(static_cast<int>(seen.size()), 60);
  }
}

TEST_F(Fixtures, PlantedLassoSupportIsRecoveredAtModerateRegularization) {
  FixtureSpec spec;
  spec.kind = "lasso";
  spec.seed = 3;
  spec.n_examples = 120;
  spec.n_features = 40;
  spec.support_frac = 0.15;
  spec.density = 0.3;
  spec.noise = 0.02;
  Fixture fx = make_fixture(spec);
  auto A = std::make_shared<SparseColumnMatrix>(fx.features);
  double lmax = compute_lambda_max(*A, fx.labels, LossFunction{LossKind::Squared});
  Vector w_ref =
      testutil::fista_l1(testutil::to_dense(*A), fx.labels, LossFunction{LossKind::Squared},
                         0.02 * lmax, 60000);
  // Every planted feature appears in the recovered support.
  for (int i = 0; i < fx.planted.size(); ++i) {
    if (fx.planted[i] != 0.0) {
      EXPECT_GT(std::abs(w_ref[i]), 1e-6) << "planted feature " << i << " lost";
    }
  }
}

TEST_F(Bench, LogRecordsHaveFixedFieldOrderAndMonotoneWall) {
  FixtureSpec spec;
  spec.kind = "lasso";
  spec.seed = 17;
  spec.n_examples = 60;
  spec.n_features = 40;
  Fixture fx = make_fixture(spec);
  write_fixture(path("data"), fx);

  RunConfig cfg;
  cfg.task = TaskKind::Lasso;
  cfg.data_path = path("data.svm");
  cfg.lambda_ratio = 0.1;
  cfg.arm = "blitzws";
  cfg.tol = 1e-6;
  cfg.out_path = path("run.log");
  cfg.prep.min_nnz = 1;
  BenchResult res = run_benchmark(cfg);
  EXPECT_LE(res.rel_subopt, 1e-6);

  std::ifstream log(path("run.log"));
  ASSERT_TRUE(log.good());
  std::string line;
  double prev_wall = 0.0;
  double prev_rel = 1e300;
  int lines = 0;
  while (std::getline(log, line)) {
    ++lines;
    int t, ws, screened;
    double wall, rel, xi, eps;
    int got = std::sscanf(line.c_str(),
                          "t=%d wall_seconds=%lf rel_subopt=%lf ws_size=%d xi=%lf eps=%lf "
                          "screened_count=%d",
                          &t, &wall, &rel, &ws, &xi, &eps, &screened);
    ASSERT_EQ(got, 7) << "unexpected log line: " << line;
    EXPECT_GT(wall, prev_wall);
    EXPECT_LE(rel, prev_rel + 1e-12);
    prev_wall = wall;
    prev_rel = rel;
  }
  EXPECT_GT(lines, 0);
}

TEST_F(Bench, CrossArmAgreementOnLassoFixture) {
  FixtureSpec spec;
  spec.kind = "lasso";
  spec.seed = 23;
  spec.n_examples = 80;
  spec.n_features = 60;
  Fixture fx = make_fixture(spec);
  write_fixture(path("data"), fx);

  double objective[4];
  const char* arms[] = {"blitzws", "plain", "plain+screen", "plain+gapsafe"};
  for (int a = 0; a < 4; ++a) {
    RunConfig cfg;
    cfg.task = TaskKind::Lasso;
    cfg.data_path = path("data.svm");
    cfg.lambda_ratio = 0.05;
    cfg.arm = arms[a];
    cfg.tol = 1e-7;
    cfg.prep.min_nnz = 1;
    BenchResult res = run_benchmark(cfg);
    objective[a] = res.objective;
    EXPECT_LE(res.rel_subopt, 1e-7) << arms[a];
  }
  for (int a = 1; a < 4; ++a) {
    EXPECT_NEAR(objective[a], objective[0], 1e-6 * (1.0 + std::abs(objective[0])));
  }
}

TEST_F(Bench, ReferenceObjectiveIsCached) {
  FixtureSpec spec;
  spec.kind = "lasso";
  spec.seed = 29;
  spec.n_examples = 40;
  spec.n_features = 20;
  Fixture fx = make_fixture(spec);
  write_fixture(path("data"), fx);

  RunConfig cfg;
  cfg.task = TaskKind::Lasso;
  cfg.data_path = path("data.svm");
  cfg.lambda_ratio = 0.1;
  cfg.prep.min_nnz = 1;
  Instance inst = load_instance(cfg);
  double v1 = reference_objective(inst, cfg);
  int ref_files = 0;
  for (const auto& e : fs::directory_iterator(dir_)) {
    if (e.path().string().find(".ref-") != std::string::npos) ++ref_files;
  }
  EXPECT_EQ(ref_files, 1);
  double v2 = reference_objective(inst, cfg);
  EXPECT_EQ(v1, v2);
}

}  // namespace
}  // namespace blitzws
