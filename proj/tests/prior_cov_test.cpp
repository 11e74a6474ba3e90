#include "bbt/prior_cov.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "bbt/error.hpp"
#include "test_util.hpp"

namespace bbt {
namespace {

using testing::rel_frobenius;

Eigen::MatrixXd random_distance(int m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::lognormal_distribution<double> inc(11.5, 0.4);
  Eigen::VectorXd p(m);
  for (int i = 0; i < m; ++i) p(i) = inc(rng);
  return log_income_distance(p);
}

TEST(LogIncomeDistance, KnownPair) {
  auto d = log_income_distance(Eigen::Vector2d(127550, 116229));
  EXPECT_NEAR(d(0, 1), std::log(127550.0 / 116229.0), 1e-13);
  EXPECT_NEAR(d(0, 1), 0.0929461, 1e-7);
  EXPECT_EQ(d(0, 1), d(1, 0));
  EXPECT_EQ(d(0, 0), 0.0);
}

TEST(LogIncomeDistance, ScaleFreeAndZeroForEqual) {
  Eigen::Vector3d p(50000, 120000, 120000);
  auto d = log_income_distance(p);
  EXPECT_EQ(d(1, 2), 0.0);
  EXPECT_LT((log_income_distance(10 * p) - d).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_THROW(log_income_distance(Eigen::Vector2d(1, 0)), ValidationError);
}

TEST(Kernel, SquaredExponentialValue) {
  Eigen::MatrixXd d(1, 1);
  d(0, 0) = 0.09288;
  auto k = kernel_matrix(d, {KernelKind::kSquaredExponential, 0.09, 1.0});
  EXPECT_NEAR(k(0, 0), std::exp(-std::pow(0.09288 / 0.09, 2)), 1e-15);
  EXPECT_NEAR(k(0, 0), 0.3447, 5e-5);
}

TEST(Kernel, UnitDiagonalBothKinds) {
  auto d = random_distance(7, 1);
  for (auto kind : {KernelKind::kSquaredExponential, KernelKind::kRationalQuadratic}) {
    auto k = kernel_matrix(d, {kind, 0.3, 2.0});
    EXPECT_LT((k.diagonal().array() - 1.0).abs().maxCoeff(), 1e-15);
  }
}

TEST(Kernel, RationalQuadraticApproachesSquaredExponentialForLargeMixture) {
  // (1 + d^2 / (2 s^2 l^2))^-s behaves like exp(-d^2 / l'^2) with l'^2 = 2 s l^2.
  auto d = random_distance(9, 2);
  const double l = 0.3, s = 1e6;
  auto rq = kernel_matrix(d, {KernelKind::kRationalQuadratic, l, s});
  auto se = kernel_matrix(d, {KernelKind::kSquaredExponential, l * std::sqrt(2.0 * s), 1.0});
  EXPECT_LT((rq - se).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(Kernel, RationalQuadraticBruteForce) {
  auto d = random_distance(6, 12);
  for (double s : {0.5, 1.0, 3.0}) {
    const double l = 0.2;
    auto rq = kernel_matrix(d, {KernelKind::kRationalQuadratic, l, s});
    for (Eigen::Index i = 0; i < d.rows(); ++i)
      for (Eigen::Index j = 0; j < d.cols(); ++j)
        EXPECT_NEAR(rq(i, j), std::pow(1.0 + d(i, j) * d(i, j) / (2 * s * s * l * l), -s), 1e-14);
  }
}

TEST(Kernel, StrictlyDecreasingInDistance) {
  Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(50, 0.0, 1.0);
  Eigen::MatrixXd d = grid.transpose();
  for (auto kind : {KernelKind::kSquaredExponential, KernelKind::kRationalQuadratic}) {
    auto k = kernel_matrix(d, {kind, 0.5, 3.0});
    for (Eigen::Index j = 1; j < k.cols(); ++j) EXPECT_LT(k(0, j), k(0, j - 1));
  }
}

TEST(Kernel, RejectsBadHyperparameters) {
  auto d = random_distance(3, 3);
  EXPECT_THROW(kernel_matrix(d, {KernelKind::kSquaredExponential, 0.0, 1.0}), ValidationError);
  EXPECT_THROW(kernel_matrix(d, {KernelKind::kRationalQuadratic, 0.1, -1.0}), ValidationError);
  EXPECT_EQ(parse_kernel_kind("rq"), KernelKind::kRationalQuadratic);
}

TEST(Constrain, IdentityGivesCenteringMatrix) {
  auto cov = constrain(Eigen::MatrixXd::Identity(3, 3));
  Eigen::MatrixXd center = Eigen::MatrixXd::Identity(3, 3) - Eigen::MatrixXd::Constant(3, 3, 1.0 / 3);
  EXPECT_LT((cov.c - center).norm(), 1e-12);
  EXPECT_EQ(cov.rank, 2);
  EXPECT_LT((cov.pinv - center).norm(), 1e-10);
}

TEST(Constrain, ProjectionIdentitiesOnKernelMatrices) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const int m = 4 + static_cast<int>(seed) * 3;
    auto sigma = kernel_matrix(random_distance(m, seed), {KernelKind::kSquaredExponential, 0.3, 1.0});
    auto cov = constrain(sigma);
    EXPECT_LT((cov.c * Eigen::VectorXd::Ones(m)).cwiseAbs().maxCoeff(), 1e-10);
    // Eigenvalues under kRankEpsilon * lambda_max are discarded, so the error scales with |C|.
    EXPECT_LT((cov.factor * cov.factor.transpose() - cov.c).norm(), 1e-10 * cov.c.norm());
    EXPECT_LT((cov.pinv - cov.pinv.transpose()).norm(), 1e-12 * cov.pinv.norm());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov.pinv);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-8 * es.eigenvalues().maxCoeff());
    EXPECT_LE(cov.rank, m - 1);
    EXPECT_LT((cov.factor.transpose() * Eigen::VectorXd::Ones(m)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Constrain, QuadraticFormEqualsLatentNorm) {
  auto sigma = kernel_matrix(random_distance(8, 4), {KernelKind::kSquaredExponential, 0.5, 1.0});
  auto cov = constrain(sigma);
  Eigen::VectorXd z = testing::gaussian_matrix(cov.rank, 1, 5).col(0);
  Eigen::VectorXd mu = cov.factor * z;
  EXPECT_NEAR(cov.quadratic_form(mu), z.squaredNorm(), 1e-8 * z.squaredNorm());
}

TEST(Constrain, JitterOnlyWhenNeeded) {
  EXPECT_FALSE(constrain(Eigen::MatrixXd::Identity(4, 4)).jitter_applied);
  Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(3, 3);
  auto cov = constrain(ones + 1e-14 * Eigen::MatrixXd::Identity(3, 3));
  EXPECT_TRUE(cov.jitter_applied);
}

TEST(Constrain, AsymmetricRejected) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(3, 3);
  s(0, 1) = 0.2;
  EXPECT_THROW(constrain(s), ValidationError);
}

TEST(SampleConstrained, ReproducibleAndSumsToZero) {
  auto cov = constrain(kernel_matrix(random_distance(6, 7), {}));
  Rng a(42), b(42);
  auto x = sample_constrained(cov, 1.0, a);
  auto y = sample_constrained(cov, 1.0, b);
  EXPECT_EQ(x, y);
  EXPECT_LT(std::abs(x.sum()), 1e-12);
}

TEST(SampleConstrained, MomentsMatchCovariance) {
  auto sigma = kernel_matrix(random_distance(5, 8), {KernelKind::kSquaredExponential, 0.4, 1.0});
  auto cov = constrain(sigma);
  Rng rng(9);
  const int n = 100000;
  Eigen::MatrixXd draws(n, 5);
  for (int r = 0; r < n; ++r) draws.row(r) = sample_constrained(cov, 1.0, rng).transpose();
  Eigen::RowVectorXd mean = draws.colwise().mean();
  Eigen::MatrixXd centered = draws.rowwise() - mean;
  Eigen::MatrixXd s = centered.transpose() * centered / (n - 1);
  EXPECT_LT(rel_frobenius(s, cov.c), 0.05);
  for (int i = 0; i < 5; ++i) EXPECT_LT(std::abs(mean(i)), 4 * std::sqrt(cov.c(i, i) / n));
}

TEST(SampleConstrained, LinearCombinationsStayInSubspace) {
  auto cov = constrain(kernel_matrix(random_distance(10, 10), {}));
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    auto a = sample_constrained(cov, 2.0, rng);
    auto b = sample_constrained(cov, 0.5, rng);
    EXPECT_LT(std::abs((3.7 * a - 1.1 * b).sum()), 1e-10);
  }
}

}  // namespace
}  // namespace bbt
