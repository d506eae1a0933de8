#include "blitzws/piecewise.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "blitzws/problems.hpp"
#include "test_util.hpp"

namespace blitzws {
namespace {

using testutil::dykstra_project;
using testutil::random_sparse_matrix;

Instance tiny_pmn() {
  // x1 <= 1, x1 + x2 <= 1.5
  SparseVec a1, a2;
  a1.push_back(0, 1.0);
  a2.push_back(0, 1.0);
  a2.push_back(1, 1.0);
  auto A = std::make_shared<SparseColumnMatrix>(2, std::vector<SparseVec>{a1, a2});
  Vector b(2);
  b << 1.0, 1.5;
  return build_min_norm(A, b);
}

TEST(EvaluateFull, MinNormFeasibleIsPureQuadratic) {
  Instance inst = tiny_pmn();
  Vector x(2);
  x << 0.3, -0.2;
  EXPECT_DOUBLE_EQ(inst.problem->evaluate_full(x), 0.5 * x.squaredNorm());
}

TEST(EvaluateFull, MinNormViolationIsInfinite) {
  Instance inst = tiny_pmn();
  Vector x(2);
  x << 2.0, 0.0;
  EXPECT_TRUE(std::isinf(inst.problem->evaluate_full(x)));
}

TEST(EvaluateFull, DimensionMismatchIsUsageError) {
  Instance inst = tiny_pmn();
  EXPECT_THROW(inst.problem->evaluate_full(Vector::Zero(3)), UsageError);
}

TEST(EvaluateFull, SvmAllMarginsSatisfiedLeavesOnlyRegularizer) {
  // Examples with b_i <a_i, x> = 2 at the probe point: every hinge is zero.
  int n = 3;
  Vector x(n);
  x << 1.0, -2.0, 0.5;
  std::vector<SparseVec> examples;
  Vector labels(4);
  for (int i = 0; i < 4; ++i) {
    labels[i] = i % 2 == 0 ? 1.0 : -1.0;
    SparseVec a;
    // a_i = labels[i] * 2 * x / ||x||^2 gives b_i <a_i, x> = 2.
    for (int k = 0; k < n; ++k) a.push_back(k, labels[i] * 2.0 * x[k] / x.squaredNorm());
    examples.push_back(std::move(a));
  }
  auto A = std::make_shared<SparseColumnMatrix>(n, std::move(examples));
  Instance inst = build_svm_primal(A, labels, 1.0);
  EXPECT_NEAR(inst.problem->evaluate_full(x), 0.5 * x.squaredNorm(), 1e-12);
}

TEST(Partition, HingeActiveBoundaryAndInactive) {
  SparseVec a;
  a.push_back(0, 1.0);
  auto A = std::make_shared<SparseColumnMatrix>(1, std::vector<SparseVec>{a});
  Vector labels(1);
  labels << 1.0;
  Instance inst = build_svm_primal(A, labels, 2.0);
  const PiecewiseTerm& term = inst.problem->term(0);

  Vector x(1);
  x << 0.5;  // margin 0.5 -> loss piece
  EXPECT_EQ(term.partition(x), 0);
  EXPECT_NEAR(term.value(x), 2.0 * (1.0 - 0.5), 1e-15);

  x << 1.0;  // exactly on the boundary -> lowest index (loss piece)
  EXPECT_EQ(term.partition(x), 0);
  EXPECT_NEAR(term.value(x), 0.0, 1e-15);

  x << 3.0;  // margin satisfied -> zero piece
  EXPECT_EQ(term.partition(x), 1);
  EXPECT_DOUBLE_EQ(term.value(x), 0.0);
}

TEST(Partition, IndicatorFeasiblePiece) {
  Instance inst = tiny_pmn();
  Vector x(2);
  x << 0.0, 0.0;
  EXPECT_EQ(inst.problem->partition_index(0, x), 0);
  x << 2.0, 0.0;
  EXPECT_EQ(inst.problem->partition_index(0, x), 1);
}

TEST(Partition, DispatchMatchesDirectFormulaOffBoundary) {
  Rng rng(31);
  // Hinge terms: compare the piece dispatch against the max form.
  auto A = std::make_shared<SparseColumnMatrix>(random_sparse_matrix(rng, 6, 10, 0.6));
  Vector labels(10);
  for (int i = 0; i < 10; ++i) labels[i] = rng.uniform() < 0.5 ? -1.0 : 1.0;
  double C = 1.7;
  Instance inst = build_svm_primal(A, labels, C);
  for (int rep = 0; rep < 100; ++rep) {
    Vector x(6);
    for (int k = 0; k < 6; ++k) x[k] = rng.gaussian();
    for (int i = 0; i < 10; ++i) {
      double direct = C * std::max(0.0, 1.0 - labels[i] * A->col(i).dot(x));
      double via_pieces = inst.problem->term(i).value(x);
      EXPECT_NEAR(via_pieces, direct, 1e-12 * (1.0 + std::abs(direct)));
    }
  }
}

TEST(EvaluateRelaxed, AllFullEqualsFullObjective) {
  Rng rng(37);
  Instance inst = testutil::random_min_norm(rng, 4, 8);
  Assignment full = Assignment::all_full(8);
  for (int rep = 0; rep < 20; ++rep) {
    Vector x(4);
    for (int k = 0; k < 4; ++k) x[k] = rng.gaussian() * 0.1;
    double a = inst.problem->evaluate_full(x);
    double b = inst.problem->evaluate_relaxed(full, x);
    if (std::isinf(a)) {
      EXPECT_TRUE(std::isinf(b));
    } else {
      EXPECT_NEAR(a, b, 1e-12 * (1.0 + std::abs(a)));
    }
  }
}

TEST(EvaluateRelaxed, SvmActivePiecesCollapse) {
  Rng rng(41);
  auto A = std::make_shared<SparseColumnMatrix>(random_sparse_matrix(rng, 5, 12, 0.5));
  Vector labels(12);
  for (int i = 0; i < 12; ++i) labels[i] = rng.uniform() < 0.5 ? -1.0 : 1.0;
  double C = 0.8;
  Instance inst = build_svm_primal(A, labels, C);

  // Assign every hinge its loss piece: f_t(x) = 0.5||x||^2 + <a_star, x> + m*C.
  Assignment assign;
  assign.piece.assign(12, 0);
  Vector a_star = Vector::Zero(5);
  for (int i = 0; i < 12; ++i) {
    SparseVec g = SparseVec::scaled(A->col(i), -C * labels[i]);
    g.add_to(1.0, a_star);
  }
  for (int rep = 0; rep < 100; ++rep) {
    Vector x(5);
    for (int k = 0; k < 5; ++k) x[k] = rng.gaussian();
    double expected = 0.5 * x.squaredNorm() + a_star.dot(x) + 12.0 * C;
    EXPECT_NEAR(inst.problem->evaluate_relaxed(assign, x), expected,
                1e-10 * (1.0 + std::abs(expected)));
  }
}

TEST(EvaluateRelaxed, CollapsedMatchesTermByTermSummation) {
  Rng rng(43);
  auto A = std::make_shared<SparseColumnMatrix>(random_sparse_matrix(rng, 5, 9, 0.5));
  Vector labels(9);
  for (int i = 0; i < 9; ++i) labels[i] = rng.uniform() < 0.5 ? -1.0 : 1.0;
  double C = 1.1;
  Instance inst = build_svm_primal(A, labels, C);
  Assignment assign;
  assign.piece.assign(9, Assignment::kFull);
  for (int i = 0; i < 9; ++i) {
    double u = rng.uniform();
    assign.piece[i] = u < 0.4 ? 0 : (u < 0.8 ? 1 : Assignment::kFull);
  }
  for (int rep = 0; rep < 100; ++rep) {
    Vector x(5);
    for (int k = 0; k < 5; ++k) x[k] = rng.gaussian();
    double direct = inst.problem->psi().value(x);
    for (int i = 0; i < 9; ++i) {
      if (assign.piece[i] == Assignment::kFull) {
        direct += inst.problem->term(i).value(x);
      } else {
        direct += subfunction_value(inst.problem->term(i).piece(assign.piece[i]).fn, x);
      }
    }
    EXPECT_NEAR(inst.problem->evaluate_relaxed(assign, x), direct,
                1e-10 * (1.0 + std::abs(direct)));
  }
}

TEST(EvaluateRelaxed, MinNormEmptyWorkingSetIsUnconstrainedQuadratic) {
  Instance inst = tiny_pmn();
  Assignment assign;
  assign.piece.assign(2, 0);  // both zero pieces
  Vector x(2);
  x << 5.0, -3.0;  // infeasible for the full problem, fine for the relaxation
  EXPECT_DOUBLE_EQ(inst.problem->evaluate_relaxed(assign, x), 0.5 * x.squaredNorm());
}

TEST(ReduceAtSolution, AllBoundaryFlagsKeepProblem) {
  Instance inst = tiny_pmn();
  Vector x = Vector::Zero(2);
  PiecewiseProblem reduced = inst.problem->reduce_at_solution(x, {true, true});
  Rng rng(47);
  for (int rep = 0; rep < 30; ++rep) {
    Vector p(2);
    p << rng.gaussian(), rng.gaussian();
    double a = inst.problem->evaluate_full(p);
    double b = reduced.evaluate_full(p);
    if (std::isinf(a)) {
      EXPECT_TRUE(std::isinf(b));
    } else {
      EXPECT_DOUBLE_EQ(a, b);
    }
  }
}

TEST(ReduceAtSolution, DropInactiveConstraintPreservesMinimizer) {
  // Constraints x1 <= -1 (active at the solution) and x1 + x2 <= 5
  // (inactive); dropping the inactive one keeps the projection unchanged.
  SparseVec a1, a2;
  a1.push_back(0, 1.0);
  a2.push_back(0, 1.0);
  a2.push_back(1, 1.0);
  auto A = std::make_shared<SparseColumnMatrix>(2, std::vector<SparseVec>{a1, a2});
  Vector b(2);
  b << -1.0, 5.0;
  Instance inst = build_min_norm(A, b);

  Vector x_star = dykstra_project(*A, b, Vector::Zero(2));
  EXPECT_NEAR(x_star[0], -1.0, 1e-9);
  EXPECT_NEAR(x_star[1], 0.0, 1e-9);

  PiecewiseProblem reduced = inst.problem->reduce_at_solution(x_star, {true, false});
  // The reduced problem has only the first constraint left; solve it with
  // the projection oracle restricted to that constraint.
  auto A1 = std::make_shared<SparseColumnMatrix>(2, std::vector<SparseVec>{a1});
  Vector b1(1);
  b1 << -1.0;
  Vector x_reduced = dykstra_project(*A1, b1, Vector::Zero(2));
  EXPECT_LT((x_reduced - x_star).norm(), 1e-6);
  EXPECT_NEAR(reduced.evaluate_full(x_star), 0.5 * x_star.squaredNorm(), 1e-12);
}

TEST(ReduceAtSolution, RandomInstancesShareMinimizerWithOracle) {
  Rng rng(53);
  for (int rep = 0; rep < 10; ++rep) {
    int n = 2 + rng.uniform_int(6);
    int m = 3 + rng.uniform_int(10);
    Instance inst = testutil::random_min_norm(rng, n, m);
    Vector x_star = dykstra_project(*inst.A, inst.labels, Vector::Zero(n), 60000);

    std::vector<bool> boundary(m);
    for (int i = 0; i < m; ++i) {
      double slack = inst.labels[i] - inst.A->col(i).dot(x_star);
      boundary[i] = slack < 1e-7 * (1.0 + std::abs(inst.labels[i]));
    }
    PiecewiseProblem reduced = inst.problem->reduce_at_solution(x_star, boundary);

    // Solve the reduced problem: only the flagged (kept) constraints remain.
    std::vector<SparseVec> kept_cols;
    std::vector<double> kept_rhs;
    for (int i = 0; i < m; ++i) {
      if (boundary[i]) {
        kept_cols.push_back(inst.A->col(i));
        kept_rhs.push_back(inst.labels[i]);
      }
    }
    Vector x_reduced;
    if (!kept_cols.empty()) {
      SparseColumnMatrix kept(n, kept_cols);
      Vector rhs = Eigen::Map<Vector>(kept_rhs.data(), static_cast<Eigen::Index>(kept_rhs.size()));
      x_reduced = dykstra_project(kept, rhs, Vector::Zero(n), 60000);
    } else {
      x_reduced = Vector::Zero(n);
    }
    EXPECT_LT((x_reduced - x_star).norm(), 1e-6);
    (void)reduced;
  }
}

TEST(GammaNormalization, ScalesObjectiveOnce) {
  // A psi declared 2-strongly convex must come out halved, with indicator
  // and zero pieces untouched and linear pieces rescaled.
  auto psi = std::make_shared<QuadraticPsi>(Vector::Zero(2));
  SparseVec g;
  g.push_back(0, 3.0);
  PiecewiseTerm linear_term({Piece{LinearPiece{g, 1.0}, AllSpace{}, true}}, 1);

  PiecewiseProblem normalized(psi, {linear_term}, 2.0);
  PiecewiseProblem plain(psi, {linear_term}, 1.0);
  Vector x(2);
  x << 0.7, -0.3;
  EXPECT_NEAR(normalized.evaluate_full(x), 0.5 * plain.evaluate_full(x), 1e-14);
  EXPECT_DOUBLE_EQ(normalized.gamma(), 2.0);
}

TEST(GammaNormalization, RejectsNonpositiveGamma) {
  auto psi = std::make_shared<QuadraticPsi>(Vector::Zero(1));
  EXPECT_THROW(PiecewiseProblem(psi, {}, 0.0), UsageError);
  EXPECT_THROW(PiecewiseProblem(psi, {}, -1.0), UsageError);
}

}  // namespace
}  // namespace blitzws
