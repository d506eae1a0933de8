#include "blitzws/capsule.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "blitzws/fixtures.hpp"
#include "test_util.hpp"

namespace blitzws {
namespace {

IterSnapshot snapshot_nd(Rng& rng, int n, double gap_slack) {
  Vector x(n), y(n);
  for (int i = 0; i < n; ++i) {
    x[i] = rng.gaussian();
    y[i] = rng.gaussian();
  }
  double d2 = (x - y).squaredNorm();
  double gap = 0.5 * d2 * (1.0 + gap_slack) + 1e-6;
  return IterSnapshot::make(x, y, gap);
}

IterSnapshot unit_snapshot(double gap, double dist) {
  Vector x = Vector::Zero(3), y = Vector::Zero(3);
  x[0] = dist;
  return IterSnapshot::make(x, y, gap);
}

TEST(TauXi, FullProgressWithMaximalDistance) {
  // gap 1, dist^2 = 2 saturates the strong-convexity bound: the bracket is
  // exactly 1 and tau(beta) = beta * sqrt(2).
  IterSnapshot s = unit_snapshot(1.0, std::sqrt(2.0));
  for (double beta : {0.05, 0.2, 0.35, 0.49}) {
    EXPECT_NEAR(tau_xi(beta, 1.0, s), beta * std::sqrt(2.0), 1e-12);
  }
}

TEST(TauXi, HandValueAtQuarter) {
  IterSnapshot s = unit_snapshot(1.0, 1.0);
  double expected = 0.25 * std::sqrt(2.0) * std::sqrt(7.0 / 6.0);
  EXPECT_NEAR(tau_xi(0.25, 1.0, s), expected, 1e-12);
  EXPECT_NEAR(expected, 0.38188, 1e-5);
}

TEST(TauXi, ClampsToZeroWhenBracketNonpositive) {
  IterSnapshot s = unit_snapshot(1.0, 1.0);
  // Near beta = 1/2 with xi < 1 the penalty term dominates.
  EXPECT_DOUBLE_EQ(tau_xi(0.499, 0.01, s), 0.0);
}

TEST(TauXi, RejectsBetaOutsideOpenInterval) {
  IterSnapshot s = unit_snapshot(1.0, 1.0);
  EXPECT_THROW(tau_xi(0.0, 0.5, s), UsageError);
  EXPECT_THROW(tau_xi(0.5, 0.5, s), UsageError);
  EXPECT_THROW(tau_xi(0.25, 0.0, s), UsageError);
}

TEST(TauXi, MonotoneInXiPointwise) {
  Rng rng(7);
  for (int rep = 0; rep < 10; ++rep) {
    IterSnapshot s = snapshot_nd(rng, 4, rng.uniform(0.0, 2.0));
    for (int bi = 1; bi < 50; ++bi) {
      double beta = bi / 100.0;
      double prev = 0.0;
      for (double xi : {0.01, 0.1, 0.3, 0.6, 0.9, 1.0}) {
        double t = tau_xi(beta, xi, s);
        EXPECT_GE(t, prev - 1e-12);
        prev = t;
      }
    }
  }
}

TEST(Snapshot, RejectsDistanceBeyondStrongConvexityBound) {
  Vector x = Vector::Zero(2), y = Vector::Zero(2);
  x[0] = 10.0;
  EXPECT_THROW(IterSnapshot::make(x, y, 1.0), UsageError);
}

TEST(ComputeCapsule, FullProgressDegeneratesToBall) {
  // At xi = 1 the region is exactly the ball centered at the midpoint with
  // radius sqrt(gap - dist^2 / 4).
  IterSnapshot s = unit_snapshot(1.0, 1.0);
  auto cap = compute_capsule(s, 1.0);
  ASSERT_TRUE(cap.has_value());
  double root3_half = std::sqrt(3.0) / 2.0;
  EXPECT_NEAR(cap->radius, root3_half, 1e-8);
  EXPECT_NEAR(cap->d_min, 0.5 - root3_half, 1e-8);
  EXPECT_NEAR(cap->d_max, 0.5 + root3_half, 1e-8);
  Vector mid = 0.5 * (s.x_prev + s.y_prev);
  EXPECT_NEAR((cap->c1 - mid).norm(), 0.0, 1e-8);
  EXPECT_NEAR((cap->c2 - mid).norm(), 0.0, 1e-8);
}

TEST(ComputeCapsule, FullProgressRadiusClosedForm) {
  IterSnapshot s = unit_snapshot(1.0, std::sqrt(2.0));
  auto cap = compute_capsule(s, 1.0);
  ASSERT_TRUE(cap.has_value());
  EXPECT_NEAR(cap->radius, 1.0 / std::sqrt(2.0), 1e-8);
}

TEST(ComputeCapsule, BallDegeneracyOnRandomSnapshots) {
  Rng rng(11);
  for (int rep = 0; rep < 100; ++rep) {
    IterSnapshot s = snapshot_nd(rng, 5, rng.uniform(0.0, 3.0));
    auto cap = compute_capsule(s, 1.0);
    ASSERT_TRUE(cap.has_value());
    double expect_r = std::sqrt(s.gap_prev - 0.25 * s.dist * s.dist);
    Vector mid = 0.5 * (s.x_prev + s.y_prev);
    double scale = std::sqrt(2.0 * s.gap_prev);
    EXPECT_NEAR(cap->radius, expect_r, 1e-8 * scale);
    EXPECT_LT((cap->c1 - mid).norm(), 1e-7 * scale);
    EXPECT_LT((cap->c2 - mid).norm(), 1e-7 * scale);
  }
}

TEST(ComputeCapsule, TinyXiRadiusTracksSlopeScale) {
  Rng rng(13);
  for (int rep = 0; rep < 5; ++rep) {
    IterSnapshot s = snapshot_nd(rng, 4, rng.uniform(0.1, 2.0));
    double xi = 1e-4;
    auto cap = compute_capsule(s, xi);
    ASSERT_TRUE(cap.has_value());
    double slope_scale = std::sqrt(2.0 * s.gap_prev * xi);
    EXPECT_GT(cap->radius, 0.0);
    EXPECT_LT(cap->radius / slope_scale, 20.0);
    // tau'(0) = sqrt(2 * gap * xi), probed by a forward difference.
    double beta = 1e-8;
    EXPECT_NEAR(tau_xi(beta, xi, s) / beta, slope_scale, 1e-3 * slope_scale);
  }
}

TEST(ComputeCapsule, NonpositiveGapSignalsConvergence) {
  IterSnapshot s;
  s.x_prev = Vector::Zero(2);
  s.y_prev = Vector::Zero(2);
  s.gap_prev = 0.0;
  s.dist = 0.0;
  EXPECT_FALSE(compute_capsule(s, 0.5).has_value());
}

TEST(ComputeCapsule, SupremaMatchDenseGrid) {
  Rng rng(17);
  for (double xi : {0.01, 0.2, 0.4, 0.9, 1.0}) {
    for (int rep = 0; rep < 6; ++rep) {
      IterSnapshot s = snapshot_nd(rng, 3, rng.uniform(0.0, 2.0));
      auto cap = compute_capsule(s, xi);
      ASSERT_TRUE(cap.has_value());
      // Locate the positivity interval coarsely, then lay the dense grid
      // over it so small xi values get comparable resolution.
      double beta_pos = 0.0;
      for (int k = 1; k < 100000; ++k) {
        double beta = 0.5 * k / 100000;
        if (tau_xi(beta, xi, s) > 0.0) beta_pos = beta;
      }
      double hi = std::min(0.5 - 1e-12, beta_pos * 1.02 + 1e-6);
      double grid_r = 0.0, grid_max = -1e300, grid_min = 1e300;
      const int kGrid = 100000;
      for (int k = 1; k <= kGrid; ++k) {
        double beta = hi * k / kGrid;
        double t = tau_xi(beta, xi, s);
        if (t <= 0.0) continue;
        grid_r = std::max(grid_r, t);
        grid_max = std::max(grid_max, beta * s.dist + t);
        grid_min = std::min(grid_min, beta * s.dist - t);
      }
      double tol = 1e-8 * std::sqrt(2.0 * s.gap_prev);
      EXPECT_NEAR(cap->radius, grid_r, tol);
      EXPECT_NEAR(cap->d_max, grid_max, tol);
      // The infimum can approach its limit value 0 at beta -> 0+.
      EXPECT_LE(cap->d_min, std::min(grid_min, 0.0) + tol);
      EXPECT_GE(cap->d_min, std::min(grid_min, 0.0) - tol);
    }
  }
}

TEST(ComputeCapsule, SampledTeardropInsideCapsule) {
  Rng rng(19);
  for (double xi : {0.01, 0.2, 0.4, 0.9, 1.0}) {
    for (int rep = 0; rep < 3; ++rep) {
      int n = 4;
      IterSnapshot s = snapshot_nd(rng, n, rng.uniform(0.0, 2.0));
      auto cap = compute_capsule(s, xi);
      ASSERT_TRUE(cap.has_value());
      Vector dir = s.x_prev - s.y_prev;
      for (int bi = 0; bi < 200; ++bi) {
        double beta = 0.5 * (bi + 0.5) / 200.0;
        double t = tau_xi(beta, xi, s);
        if (t <= 0.0) continue;
        Vector center = s.y_prev + beta * dir;
        for (int p = 0; p < 50; ++p) {
          Vector u(n);
          for (int k = 0; k < n; ++k) u[k] = rng.gaussian();
          u *= rng.uniform() * t / u.norm();
          EXPECT_LE(cap->distance_to_segment(center + u), cap->radius + 1e-9);
        }
      }
    }
  }
}

TEST(Containment, HalfSpaceExamples) {
  Vector zero2 = Vector::Zero(2);
  SparseVec a;
  a.push_back(0, 1.0);
  CapsuleParams cap;
  cap.c1 = zero2;
  cap.c2 = zero2;
  cap.radius = 1.0;
  EXPECT_FALSE(capsule_intersects_halfspace_complement(cap, a, 2.0));
  EXPECT_TRUE(capsule_intersects_halfspace_complement(cap, a, 0.5));

  // Degenerate point capsule exactly on the hyperplane: strict test fails.
  CapsuleParams pt;
  pt.c1 = zero2;
  pt.c2 = zero2;
  pt.radius = 0.0;
  EXPECT_FALSE(capsule_intersects_halfspace_complement(pt, a, 0.0));
}

TEST(Containment, BallPrimitives) {
  Vector zero2 = Vector::Zero(2);
  SparseVec a;
  a.push_back(0, 1.0);
  EXPECT_TRUE(ball_inside_halfspace(zero2, 1.0, a, 2.0));
  EXPECT_FALSE(ball_inside_halfspace(zero2, 1.0, a, 1.0));
  EXPECT_FALSE(ball_inside_ball(zero2, 1.0, zero2, 1.0));  // strict boundary
  EXPECT_TRUE(ball_inside_ball(zero2, 1.0, zero2, 1.001));
}

TEST(Containment, CapsuleInsideConvexMatchesSampling) {
  // Rejection-sampling oracle on random capsules and half-spaces: the
  // two-end-ball test may only declare containment when every sampled
  // capsule point lies inside.
  Rng rng(23);
  int contained_cases = 0;
  for (int rep = 0; rep < 40; ++rep) {
    int n = 3;
    CapsuleParams cap;
    cap.c1 = Vector(n);
    cap.c2 = Vector(n);
    for (int k = 0; k < n; ++k) {
      cap.c1[k] = rng.uniform(-1.0, 1.0);
      cap.c2[k] = rng.uniform(-1.0, 1.0);
    }
    cap.radius = rng.uniform(0.1, 0.8);

    SparseVec a;
    for (int k = 0; k < n; ++k) a.push_back(k, rng.gaussian());
    double b = rng.uniform(-0.5, 3.0);
    Subdomain dom = HalfSpace{a, b};

    if (capsule_inside_subdomain(cap, dom)) {
      ++contained_cases;
      for (int p = 0; p < 10000; ++p) {
        double t = rng.uniform();
        Vector c = cap.c1 + t * (cap.c2 - cap.c1);
        Vector u(n);
        for (int k = 0; k < n; ++k) u[k] = rng.gaussian();
        u *= rng.uniform() * cap.radius / u.norm();
        ASSERT_TRUE(subdomain_contains(dom, c + u));
      }
    }
  }
  EXPECT_GT(contained_cases, 0);
}

TEST(Containment, GroupCapAtOriginReducesToLipschitzTest) {
  SparseVec col;
  col.push_back(0, 3.0);
  col.push_back(1, 4.0);  // norm 5
  SparseColumnMatrix mat(2, {col});
  GroupNormCap cap{&mat, {0}, 1.0, 5.0};
  Vector origin = Vector::Zero(2);
  EXPECT_TRUE(ball_inside_subdomain(origin, 0.19, Subdomain{cap}));   // 5 * 0.19 < 1
  EXPECT_FALSE(ball_inside_subdomain(origin, 0.21, Subdomain{cap}));  // 5 * 0.21 > 1
}

}  // namespace
}  // namespace blitzws
