#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "problems.hpp"
#include "ralmkit/bench.hpp"
#include "ralmkit/newton.hpp"

using namespace ralmkit;

namespace {

Matrix spd(Eigen::Index n, std::uint64_t seed) {
  const Matrix a = oracle::gaussian(n, n, seed);
  return a * a.transpose() + Matrix::Identity(n, n);
}

}  // namespace

TEST(Newton, CgSolvesIdentity) {
  const Matrix b = oracle::gaussian(4, 3, 1);
  const CgResult r = cg_solve([](const Matrix& v) -> Matrix { return v; }, 0.0, b, 1e-14, 50);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.iterations, 1);
  EXPECT_LE((r.solution - b).norm(), 1e-14);
}

TEST(Newton, CgMatchesDenseSolveWithShift) {
  const Matrix a = spd(5, 3);
  const Matrix b = oracle::gaussian(5, 1, 4);
  const double shift = 0.3;
  const CgResult r =
      cg_solve([&](const Matrix& v) -> Matrix { return a * v; }, shift, b, 1e-13, 100);
  const Matrix expect = (a + shift * Matrix::Identity(5, 5)).ldlt().solve(b);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.iterations, 5 + 2);
  EXPECT_LE((r.solution - expect).norm(), 1e-10);
}

TEST(Newton, CgZeroRightHandSide) {
  const CgResult r = cg_solve([](const Matrix& v) -> Matrix { return 2.0 * v; }, 0.0,
                              Matrix::Zero(3, 2), 1e-12, 10);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_EQ(r.solution.norm(), 0.0);
}

TEST(Newton, CgStopsOnNegativeCurvature) {
  Matrix a = Matrix::Identity(3, 3);
  a(0, 0) = -1.0;
  const Matrix b = Matrix::Ones(3, 1);
  const CgResult r = cg_solve([&](const Matrix& v) -> Matrix { return a * v; }, 0.0, b, 1e-12, 10);
  EXPECT_TRUE(r.negative_curvature);
  EXPECT_FALSE(r.converged);
}

TEST(Newton, StronglyConvexQuadraticConvergesQuickly) {
  const Matrix q = spd(6, 8);
  const Matrix c = oracle::gaussian(6, 1, 9);
  const Matrix a = oracle::gaussian(4, 6, 10);
  const Problem p = testprob::euclidean_quadratic(q, c, a, 0.3);
  const Matrix y = 0.1 * oracle::gaussian(4, 1, 11);
  NewtonConfig cfg;
  cfg.grad_tol = 1e-10;
  const NewtonResult r = ssn_minimize(p, 2.0, y, p.manifold.make_point(Matrix::Zero(6, 1)), cfg);
  EXPECT_EQ(r.stats.status, NewtonStatus::kConverged);
  EXPECT_LE(r.stats.iterations, 15);
  EXPECT_LE(auglag_rgrad(p, 2.0, r.x, y).norm(), 1e-10);
  EXPECT_EQ(r.stats.final_grad_norm, auglag_rgrad(p, 2.0, r.x, y).norm());
}

TEST(Newton, UnconstrainedQuadraticMatchesLinearSolve) {
  // Tiny weight and zero multiplier leave 1/2 x^T Q x + c^T x.
  const Matrix q = spd(5, 12);
  const Matrix c = oracle::gaussian(5, 1, 13);
  const Problem p = testprob::euclidean_quadratic(q, c, Matrix::Zero(1, 5), 0.5);
  NewtonConfig cfg;
  cfg.grad_tol = 1e-12;
  const NewtonResult r =
      ssn_minimize(p, 1.0, Matrix::Zero(1, 1), p.manifold.make_point(Matrix::Zero(5, 1)), cfg);
  EXPECT_LE((r.x.ambient() - q.ldlt().solve(-c)).norm(), 1e-10);
}

TEST(Newton, StartingAtStationaryPointTakesNoSteps) {
  const double mu = 0.8;
  const Problem p = build_cm(4, 2, mu, 2.0);
  const Point x = p.manifold.make_point(cm4_stationary_point());
  NewtonConfig cfg;
  int observed = 0;
  const NewtonResult r = ssn_minimize(p, 10.0, cm4_multiplier(mu), x, cfg, {},
                                      [&](const Point&) { ++observed; });
  EXPECT_EQ(r.stats.iterations, 0);
  EXPECT_EQ(r.stats.status, NewtonStatus::kConverged);
  EXPECT_EQ(observed, 1);
  EXPECT_EQ(r.x.ambient(), x.ambient());
}

TEST(Newton, ObjectiveTraceIsMonotone) {
  const Problem p = build_cm(12, 3, 0.4, 6.0);
  const Matrix y = 0.2 * oracle::gaussian(12, 3, 5);
  NewtonConfig cfg;
  cfg.grad_tol = 1e-9;
  const NewtonResult r = ssn_minimize(p, 5.0, y, p.manifold.random_point(2), cfg);
  ASSERT_GE(r.stats.objective_trace.size(), 2u);
  for (std::size_t k = 1; k < r.stats.objective_trace.size(); ++k) {
    EXPECT_LE(r.stats.objective_trace[k], r.stats.objective_trace[k - 1] + 1e-12) << "k=" << k;
  }
  EXPECT_LE(p.manifold.point_violation(r.x), 1e-10);
}

TEST(Newton, SuperlinearTailNearStationaryPair) {
  const double mu = 0.8;
  const Problem p = build_cm(4, 2, mu, 2.0);
  const Point xbar = p.manifold.make_point(cm4_stationary_point());
  const Matrix y = cm4_multiplier(mu);
  const Point x0 = p.manifold.retract(xbar, 0.05 * p.manifold.random_tangent(xbar, 3));
  std::vector<double> dist;
  NewtonConfig cfg;
  cfg.grad_tol = 1e-13;
  const NewtonResult r = ssn_minimize(p, 10.0, y, x0, cfg, {}, [&](const Point& x) {
    dist.push_back((x.ambient() - xbar.ambient()).norm());
  });
  EXPECT_EQ(r.stats.status, NewtonStatus::kConverged);
  EXPECT_LE(dist.back(), 1e-12);
  int pairs = 0;
  for (std::size_t k = 0; k + 1 < dist.size(); ++k) {
    if (dist[k] < 1e-7 || dist[k] > 1e-2) continue;
    EXPECT_LE(dist[k + 1], 100.0 * dist[k] * dist[k]) << "k=" << k;
    ++pairs;
  }
  EXPECT_GE(pairs, 1);
}

TEST(Newton, InnerStopCallbackEndsEarly) {
  const Problem p = build_cm(10, 2, 0.3, 5.0);
  const Matrix y = Matrix::Zero(10, 2);
  NewtonConfig cfg;
  const NewtonResult r = ssn_minimize(p, 2.0, y, p.manifold.random_point(1), cfg,
                                      [](const InnerState& s) { return s.iteration >= 2; });
  EXPECT_EQ(r.stats.iterations, 2);
}

TEST(Newton, MaxIterationsReported) {
  const Problem p = build_cm(30, 3, 0.3, 10.0);
  NewtonConfig cfg;
  cfg.max_iter = 1;
  cfg.grad_tol = 1e-15;
  const NewtonResult r = ssn_minimize(p, 2.0, Matrix::Zero(30, 3), p.manifold.random_point(4), cfg);
  EXPECT_EQ(r.stats.status, NewtonStatus::kMaxIterations);
  EXPECT_EQ(r.stats.iterations, 1);
}

TEST(Newton, FixedRankProblemConverges) {
  const RmcInstance inst = generate_rmc({.m = 10, .n = 8, .r = 2, .outlier_density = 0.0, .seed = 6});
  const Problem p = build_rmc(inst);
  NewtonConfig cfg;
  cfg.grad_tol = 1e-9;
  const Matrix y = Matrix::Zero(10, 8);
  const NewtonResult r = ssn_minimize(p, 5.0, y, p.manifold.random_point(3), cfg);
  EXPECT_LE(p.manifold.point_violation(r.x), 1e-8);
  EXPECT_LE(r.stats.objective_trace.back(), r.stats.objective_trace.front());
}

TEST(Newton, ConfigValidation) {
  NewtonConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.nu_bar = 0.0;
  EXPECT_THROW(cfg.validate(), DomainError);
  cfg = {};
  cfg.armijo = 0.5;
  EXPECT_THROW(cfg.validate(), DomainError);
  cfg = {};
  cfg.backtrack = 1.0;
  EXPECT_THROW(cfg.validate(), DomainError);
  cfg = {};
  cfg.max_iter = -1;
  EXPECT_THROW(cfg.validate(), DomainError);
}
