#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "problems.hpp"
#include "ralmkit/bench.hpp"
#include "ralmkit/certify.hpp"
#include "ralmkit/io.hpp"

using namespace ralmkit;

namespace {

struct Cm4 {
  explicit Cm4(double mu) : p(build_cm(4, 2, mu, 2.0)), y(cm4_multiplier(mu)) {
    x = p.manifold.make_point(cm4_stationary_point());
  }
  Problem p;
  Point x;
  Matrix y;
};

// Tangent directions of St(4, 2) at the fixture supported on its nonzeros,
// computed from scratch.
Matrix cm4_cone_oracle() {
  const Matrix x = cm4_stationary_point();
  const Matrix t = oracle::stiefel_tangent_basis(x);
  std::vector<Eigen::Index> zeros;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    if (x(k) == 0.0) zeros.push_back(k);
  }
  Matrix c(static_cast<Eigen::Index>(zeros.size()), t.cols());
  for (std::size_t i = 0; i < zeros.size(); ++i) c.row(static_cast<Eigen::Index>(i)) = t.row(zeros[i]);
  return t * oracle::null_space(c);
}

Matrix vec_stack(const SubspaceBasis& b) {
  Matrix out(b.vectors.front().size(), b.dimension());
  for (Eigen::Index j = 0; j < b.dimension(); ++j) {
    out.col(j) = b.vectors[static_cast<std::size_t>(j)].reshaped();
  }
  return out;
}

}  // namespace

TEST(Certify, CompressedModesConeMatchesOracle) {
  const Cm4 cm(0.8);
  const SubspaceBasis b = critical_cone_basis(cm.p, cm.x, cm.y);
  ASSERT_EQ(b.dimension(), 2);
  const Matrix oracle_basis = cm4_cone_oracle();
  ASSERT_EQ(oracle_basis.cols(), 2);
  const Matrix ours = vec_stack(b);
  // Same subspace: projectors agree.
  EXPECT_LE((ours * ours.transpose() - oracle_basis * oracle_basis.transpose()).norm(), 1e-10);
  EXPECT_LE((ours.transpose() * ours - Matrix::Identity(2, 2)).norm(), 1e-12);

  // Each direction moves the two nonzeros of a column in opposite directions.
  const double a = 1.0 / std::sqrt(2.0);
  Matrix e1 = Matrix::Zero(4, 2), e2 = Matrix::Zero(4, 2);
  e1(2, 0) = a;
  e1(3, 0) = -a;
  e2(0, 1) = a;
  e2(1, 1) = -a;
  for (const Matrix& v : b.vectors) {
    const double c1 = frob_inner(v, e1), c2 = frob_inner(v, e2);
    EXPECT_LE((v - c1 * e1 - c2 * e2).norm(), 1e-12);
  }
}

TEST(Certify, CompressedModesMinEigenvalue) {
  for (double mu : {0.1, 0.8, 2.0, 5.0}) {
    const Cm4 cm(mu);
    const Certificate c = mssosc_certificate(cm.p, cm.x, cm.y);
    EXPECT_NEAR(c.min_eigenvalue, 8.0 - std::sqrt(2.0) * mu, 1e-10) << "mu=" << mu;
    EXPECT_EQ(c.dimension, 2);
    EXPECT_EQ(c.verdict, Verdict::kHolds);
  }
}

TEST(Certify, CompressedModesMinEigenvalueFromRayleighQuotients) {
  // Second derivative of L along the geodesic-free curve t -> R(t v), v in the cone.
  const Cm4 cm(0.8);
  const SubspaceBasis b = critical_cone_basis(cm.p, cm.x, cm.y);
  Matrix h(2, 2);
  auto lag = [&](const Matrix& v, double t) {
    const Point z = cm.p.manifold.retract(cm.x, t * v);
    return cm.p.f(z) + frob_inner(cm.y, cm.p.g(z));
  };
  const double step = 1e-4;
  auto second = [&](const Matrix& v) {
    return (lag(v, step) - 2.0 * lag(v, 0.0) + lag(v, -step)) / (step * step);
  };
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const Matrix& vi = b.vectors[static_cast<std::size_t>(i)];
      const Matrix& vj = b.vectors[static_cast<std::size_t>(j)];
      h(i, j) = 0.25 * (second(vi + vj) - second(vi - vj));
    }
  }
  const double expect = Eigen::SelfAdjointEigenSolver<Matrix>(h).eigenvalues().minCoeff();
  EXPECT_NEAR(mssosc_certificate(cm.p, cm.x, cm.y).min_eigenvalue, expect, 1e-5);
}

TEST(Certify, CompressedModesBoundaryWeightFails) {
  const Cm4 at(4.0 * std::sqrt(2.0));
  const Certificate c = mssosc_certificate(at.p, at.x, at.y);
  EXPECT_NEAR(c.min_eigenvalue, 0.0, 1e-10);
  EXPECT_EQ(c.verdict, Verdict::kFails);
  const Cm4 beyond(6.0);
  EXPECT_EQ(mssosc_certificate(beyond.p, beyond.x, beyond.y).verdict, Verdict::kFails);
}

TEST(Certify, InteriorMultiplierGivesDegenerateCone) {
  Matrix c(3, 1);
  c << 0.2, -0.3, 0.1;
  const Problem p =
      testprob::euclidean_quadratic(Matrix::Identity(3, 3), c, Matrix::Identity(3, 3), 1.0);
  const Point x = p.manifold.make_point(Matrix::Zero(3, 1));
  const Matrix y = -c;
  EXPECT_LE(kkt_residual(p, x, y), 1e-15);
  const Certificate cert = mssosc_certificate(p, x, y);
  EXPECT_EQ(cert.dimension, 0);
  EXPECT_EQ(cert.verdict, Verdict::kDegenerateHolds);
  EXPECT_EQ(cert.min_eigenvalue, std::numeric_limits<double>::infinity());
  EXPECT_TRUE(cert.holds());
}

TEST(Certify, RobustCompletionToyConeIsTrivial) {
  Matrix e(2, 2);
  e << 0.3, -0.2, 0.4, 0.5;
  const Problem p = build_rmc(rmc_toy_instance(e));
  const Point x = p.manifold.make_point(rmc_toy_factors().a_ex);
  const Matrix y = load_csv(std::string(RALMKIT_TEST_DATA) + "/rmc_toy_multiplier.csv");
  const Certificate c = mssosc_certificate(p, x, y);
  EXPECT_EQ(c.dimension, 0);
  EXPECT_EQ(c.verdict, Verdict::kDegenerateHolds);
}

TEST(Certify, RejectsNonMultiplier) {
  const Cm4 cm(0.8);
  EXPECT_THROW(critical_cone_basis(cm.p, cm.x, 2.0 * cm.y), InvariantError);
}

TEST(Certify, GeneralizedHessianPositiveAtCompressedModes) {
  const Cm4 cm(0.8);
  const Certificate c = genhess_min_eig(cm.p, 10.0, cm.x, cm.y, true);
  EXPECT_GT(c.min_eigenvalue, 0.0);
  EXPECT_EQ(c.verdict, Verdict::kHolds);
  EXPECT_EQ(c.dimension, cm.p.manifold.dimension());
  EXPECT_FALSE(c.partial);
  EXPECT_EQ(c.boundary_count, 0u);
  EXPECT_EQ(c.elements_enumerated, 1u);
}

TEST(Certify, GeneralizedHessianEnumeratesKinks) {
  // y = mu on the zeros puts each of them exactly on a kink.
  const double mu = 0.8;
  const Cm4 cm(mu);
  const Matrix y = Matrix::Constant(4, 2, mu);
  const Certificate all = genhess_min_eig(cm.p, 10.0, cm.x, y, true);
  EXPECT_EQ(all.boundary_count, 4u);
  EXPECT_EQ(all.elements_enumerated, 16u);
  const Certificate one = genhess_min_eig(cm.p, 10.0, cm.x, y, false);
  EXPECT_EQ(one.elements_enumerated, 1u);
  EXPECT_LE(all.min_eigenvalue, one.min_eigenvalue + 1e-12);
}

TEST(Certify, GeneralizedHessianDominatesQuadraticCurvature) {
  const Matrix g = oracle::gaussian(4, 4, 2);
  const Matrix q = g * g.transpose() + 0.5 * Matrix::Identity(4, 4);
  const double lmin = Eigen::SelfAdjointEigenSolver<Matrix>(q).eigenvalues().minCoeff();
  const Problem p = testprob::euclidean_quadratic(q, oracle::gaussian(4, 1, 3),
                                                  oracle::gaussian(3, 4, 4), 0.7);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Point x = p.manifold.make_point(oracle::gaussian(4, 1, s + 10));
    const Matrix y = 0.3 * oracle::gaussian(3, 1, s + 20);
    const Certificate c = genhess_min_eig(p, 2.0, x, y, true);
    EXPECT_GE(c.min_eigenvalue, lmin - 1e-10);
  }
}

TEST(Certify, GeneralizedHessianSingleElementAgainstDenseAssembly) {
  // Euclidean: Q + rho A^T (I - D) A with D the 0/1 mask.
  const Matrix q = Matrix::Identity(3, 3) * 0.1;
  Matrix a(2, 3);
  a << 1, 2, 0, 0, 1, -1;
  const double mu = 1.0, rho = 3.0;
  const Problem p = testprob::euclidean_quadratic(q, Matrix::Zero(3, 1), a, mu);
  Matrix xv(3, 1);
  xv << 1.0, 0.2, 0.1;
  const Point x = p.manifold.make_point(xv);
  const Matrix y = Matrix::Zero(2, 1);
  const Matrix shifted = a * xv;
  Matrix d = Matrix::Zero(2, 2);
  for (int i = 0; i < 2; ++i) d(i, i) = std::abs(shifted(i)) > mu / rho ? 1.0 : 0.0;
  const Matrix h = q + rho * a.transpose() * (Matrix::Identity(2, 2) - d) * a;
  const double expect = Eigen::SelfAdjointEigenSolver<Matrix>(h).eigenvalues().minCoeff();
  EXPECT_NEAR(genhess_min_eig(p, rho, x, y, false).min_eigenvalue, expect, 1e-12);
}

TEST(Certify, SecondOrderConditionAndHessianAgreeAcrossWeights) {
  for (double mu : {0.2, 0.8, 2.0, 4.0}) {
    const Cm4 cm(mu);
    const bool ssosc = mssosc_certificate(cm.p, cm.x, cm.y).holds();
    const bool gh = genhess_min_eig(cm.p, 100.0, cm.x, cm.y, true).holds();
    EXPECT_EQ(ssosc, gh) << "mu=" << mu;
  }
}

TEST(Certify, ScalingObjectiveScalesEigenvalue) {
  const double mu = 0.8, c = 3.0;
  const Cm4 base(mu);
  CmInstance inst = make_cm_instance(4, 2, c * mu, 2.0);
  inst.h *= c;
  const Problem scaled = build_cm(inst);
  const double e0 = mssosc_certificate(base.p, base.x, base.y).min_eigenvalue;
  const double e1 = mssosc_certificate(scaled, base.x, c * base.y).min_eigenvalue;
  EXPECT_NEAR(e1, c * e0, 1e-9);
}

TEST(Certify, EigenvalueIndependentOfBasisChoice) {
  const Cm4 cm(0.8);
  SubspaceBasis b = critical_cone_basis(cm.p, cm.x, cm.y);
  const double th = 0.7;
  SubspaceBasis rotated;
  rotated.vectors = {std::cos(th) * b.vectors[0] + std::sin(th) * b.vectors[1],
                     -std::sin(th) * b.vectors[0] + std::cos(th) * b.vectors[1]};
  EXPECT_NEAR(mssosc_from_basis(cm.p, cm.x, cm.y, b).min_eigenvalue,
              mssosc_from_basis(cm.p, cm.x, cm.y, rotated).min_eigenvalue, 1e-12);
}

TEST(Certify, RateFitOnGeometricSequence) {
  std::vector<double> r;
  for (int k = 0; k < 20; ++k) r.push_back(std::pow(0.5, k));
  const RateFit f = fit_linear_rate(r);
  EXPECT_NEAR(f.rate, 0.5, 1e-12);
  EXPECT_NEAR(f.fit_quality, 1.0, 1e-12);
  EXPECT_EQ(f.points, 10u);

  const std::vector<double> flat(8, 3.0);
  const RateFit g = fit_linear_rate(flat, 1.0);
  EXPECT_NEAR(g.rate, 1.0, 1e-12);
  EXPECT_EQ(g.fit_quality, 1.0);
  EXPECT_EQ(g.points, 8u);
}

TEST(Certify, RateFitToleratesSmallNoise) {
  std::vector<double> r;
  for (int k = 0; k < 40; ++k) r.push_back(std::pow(0.5, k) * (1.0 + 0.01 * std::sin(k)));
  const RateFit f = fit_linear_rate(r, 1.0);
  EXPECT_GE(f.rate, 0.49);
  EXPECT_LE(f.rate, 0.51);
  EXPECT_GE(f.fit_quality, 0.99);
}

TEST(Certify, RateFitUsesAtLeastFivePoints) {
  std::vector<double> r;
  for (int k = 0; k < 7; ++k) r.push_back(std::pow(0.3, k));
  EXPECT_EQ(fit_linear_rate(r, 0.1).points, 5u);
}

TEST(Certify, RateFitRejectsBadInput) {
  EXPECT_THROW(fit_linear_rate(std::vector<double>{1, 0.5, 0.25}), DomainError);
  EXPECT_THROW(fit_linear_rate(std::vector<double>{1, 0.5, 0.25, 0.0, 0.1, 0.1}, 1.0),
               DomainError);
  EXPECT_THROW(fit_linear_rate(std::vector<double>(6, 1.0), 0.0), DomainError);
}
