#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <fstream>
#include <random>

#include "tgeval/errors.hpp"
#include "tgeval/frechet.hpp"

namespace tgeval {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd random_spd(std::mt19937_64& gen, int dim, double ridge = 0.1) {
  std::normal_distribution<double> normal;
  MatrixXd a(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) a(i, j) = normal(gen);
  }
  return a * a.transpose() + ridge * MatrixXd::Identity(dim, dim);
}

GaussianStats stats(VectorXd mean, MatrixXd cov) {
  GaussianStats s;
  s.mean = std::move(mean);
  s.cov = std::move(cov);
  s.n = 100;
  return s;
}

// Eigenvalues of the non-symmetric product, taken by a general eigensolver.
double eigen_oracle_fd(const GaussianStats& r, const GaussianStats& g) {
  Eigen::EigenSolver<MatrixXd> solver(r.cov * g.cov);
  double cross = 0.0;
  for (const auto& lambda : solver.eigenvalues()) cross += std::sqrt(std::max(lambda.real(), 0.0));
  return (r.mean - g.mean).squaredNorm() + r.cov.trace() + g.cov.trace() - 2.0 * cross;
}

TEST(FitGaussian, HandExamples) {
  MatrixXd rows(2, 2);
  rows << 0, 0, 2, 0;
  const auto s = fit_gaussian(rows);
  EXPECT_EQ(s.mean, Eigen::Vector2d(1, 0));
  MatrixXd expected(2, 2);
  expected << 2, 0, 0, 0;
  EXPECT_EQ(s.cov, expected);

  MatrixXd one_d(3, 1);
  one_d << 0, 1, 2;
  const auto t = fit_gaussian(one_d);
  EXPECT_DOUBLE_EQ(t.mean(0), 1.0);
  EXPECT_DOUBLE_EQ(t.cov(0, 0), 1.0);

  const MatrixXd same = MatrixXd::Constant(5, 3, 0.7);
  EXPECT_TRUE(fit_gaussian(same).cov.isZero(0.0));
}

TEST(FitGaussian, NeedsTwoRows) {
  EXPECT_THROW(fit_gaussian(MatrixXd::Zero(1, 3)), DataError);
}

TEST(FitGaussian, CovarianceIsExactlySymmetric) {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> normal;
  MatrixXd rows(50, 7);
  for (auto& x : rows.reshaped()) x = normal(gen);
  const auto s = fit_gaussian(rows);
  EXPECT_EQ(s.cov, MatrixXd(s.cov.transpose()));
}

TEST(Sqrtm, ClosedForms) {
  EXPECT_TRUE(sqrtm_psd(MatrixXd::Identity(4, 4)).isApprox(MatrixXd::Identity(4, 4), 1e-15));
  const MatrixXd d = Eigen::Vector2d(4, 9).asDiagonal();
  const MatrixXd expected = Eigen::Vector2d(2, 3).asDiagonal();
  EXPECT_LT((sqrtm_psd(d) - expected).norm(), 1e-14);
}

TEST(Sqrtm, ReconstructsRandomSpd) {
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 30; ++trial) {
    const int dim = 1 + trial % 32;
    const MatrixXd a = random_spd(gen, dim);
    const MatrixXd root = sqrtm_psd(a);
    EXPECT_LT((root * root - a).norm(), 1e-8) << dim;
    EXPECT_EQ(root, MatrixXd(root.transpose()));
  }
}

TEST(Sqrtm, ClampsNoiseRejectsRealNegatives) {
  MatrixXd tiny(2, 2);
  tiny << 1.0, 0.0, 0.0, -1e-9;
  const auto r = sqrtm_psd_detailed(tiny);
  EXPECT_EQ(r.clamped_eigenvalues, 1);
  EXPECT_EQ(r.root(1, 1), 0.0);

  MatrixXd negative(2, 2);
  negative << 1.0, 0.0, 0.0, -0.1;
  EXPECT_THROW(sqrtm_psd(negative), NumericalError);

  MatrixXd asymmetric(2, 2);
  asymmetric << 1.0, 0.5, 0.0, 1.0;
  EXPECT_THROW(sqrtm_psd(asymmetric), NumericalError);
}

TEST(Frechet, ClosedForms) {
  std::mt19937_64 gen(3);
  const auto r = stats(VectorXd::Random(5), random_spd(gen, 5));
  EXPECT_NEAR(frechet_distance(r, r).value, 0.0, 1e-9);

  const auto a = stats(VectorXd::Constant(1, 0.0), MatrixXd::Constant(1, 1, 1.0));
  const auto b = stats(VectorXd::Constant(1, 1.0), MatrixXd::Constant(1, 1, 4.0));
  EXPECT_NEAR(frechet_distance(a, b).value, 2.0, 1e-9);

  const auto c = stats(Eigen::Vector2d(0, 0), MatrixXd::Identity(2, 2));
  const auto d =
      stats(Eigen::Vector2d(3, 0), MatrixXd(Eigen::Vector2d(4, 1).asDiagonal()));
  const auto cd = frechet_distance(c, d);
  EXPECT_NEAR(cd.value, 10.0, 1e-9);
  EXPECT_NEAR(cd.mean_term, 9.0, 1e-12);
  EXPECT_FALSE(cd.jitter_applied);
}

TEST(Frechet, MatchesIndependentScipyFixture) {
  std::ifstream in(std::string(TGEVAL_FIXTURE_DIR) + "/fd_pairs.txt");
  ASSERT_TRUE(in);
  int dim = 0, cases = 0;
  double expected = 0.0;
  while (in >> dim >> expected) {
    VectorXd mu_r(dim), mu_g(dim);
    MatrixXd cov_r(dim, dim), cov_g(dim, dim);
    for (auto& x : mu_r) in >> x;
    for (auto& x : mu_g) in >> x;
    for (int i = 0; i < dim; ++i) {
      for (int j = 0; j < dim; ++j) in >> cov_r(i, j);
    }
    for (int i = 0; i < dim; ++i) {
      for (int j = 0; j < dim; ++j) in >> cov_g(i, j);
    }
    const auto fd = frechet_distance(stats(mu_r, cov_r), stats(mu_g, cov_g));
    EXPECT_NEAR(fd.value, expected, 1e-6 * std::max(1.0, std::abs(expected))) << "case " << cases;
    ++cases;
  }
  EXPECT_GE(cases, 10);
}

TEST(Frechet, MatchesGeneralEigenOracle) {
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 40; ++trial) {
    const int dim = 1 + trial % 8;
    const auto r = stats(VectorXd::Random(dim), random_spd(gen, dim));
    const auto g = stats(VectorXd::Random(dim), random_spd(gen, dim));
    const double expected = eigen_oracle_fd(r, g);
    EXPECT_NEAR(frechet_distance(r, g).value, expected, 1e-6 * std::max(1.0, expected)) << trial;
  }
}

TEST(Frechet, SymmetricInArguments) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = 2 + trial % 12;
    const auto r = stats(VectorXd::Random(dim), random_spd(gen, dim));
    const auto g = stats(VectorXd::Random(dim), random_spd(gen, dim));
    EXPECT_NEAR(frechet_distance(r, g).value, frechet_distance(g, r).value, 1e-9);
  }
}

TEST(Frechet, TranslationAddsSquaredShift) {
  std::mt19937_64 gen(6);
  const MatrixXd cov = random_spd(gen, 6);
  const auto r = stats(VectorXd::Zero(6), cov);
  const VectorXd v = VectorXd::LinSpaced(6, -1.0, 2.0);
  const auto base = frechet_distance(r, stats(VectorXd::Zero(6), cov)).value;
  EXPECT_NEAR(frechet_distance(r, stats(v, cov)).value - base, v.squaredNorm(), 1e-9);
}

TEST(Frechet, StrictlyIncreasingInMeanSeparation) {
  std::mt19937_64 gen(7);
  const MatrixXd cov = random_spd(gen, 4);
  const auto r = stats(VectorXd::Zero(4), cov);
  double previous = -1.0;
  for (int step = 0; step <= 10; ++step) {
    const double fd =
        frechet_distance(r, stats(VectorXd::Constant(4, 0.3 * step), cov)).value;
    EXPECT_GT(fd, previous);
    previous = fd;
  }
}

TEST(Frechet, SplitHalfFarBelowShiftedCopy) {
  std::mt19937_64 gen(8);
  std::normal_distribution<double> normal;
  MatrixXd rows(5000, 16);
  for (auto& x : rows.reshaped()) x = normal(gen);
  const auto a = fit_gaussian(MatrixXd(rows.topRows(2500)));
  const auto b = fit_gaussian(MatrixXd(rows.bottomRows(2500)));
  MatrixXd shifted = rows.bottomRows(2500);
  shifted.rowwise() += Eigen::RowVectorXd::Constant(16, 0.5);
  const double split = frechet_distance(a, b).value;
  const double shift = frechet_distance(a, fit_gaussian(shifted)).value;
  EXPECT_GT(split, 0.0);
  EXPECT_LT(split, 0.1 * shift);
}

TEST(Frechet, SingularCovarianceGetsJitter) {
  MatrixXd rows(3, 3);
  rows << 0, 0, 0, 1, 0, 0, 2, 0, 0;  // rank one
  const auto s = fit_gaussian(rows);
  const auto fd = frechet_distance(s, s);
  EXPECT_TRUE(fd.jitter_applied);
  EXPECT_GT(fd.jitter, 0.0);
  EXPECT_NEAR(fd.value, 0.0, 1e-9);
}

TEST(Frechet, DimensionMismatchRejected) {
  const auto a = stats(VectorXd::Zero(2), MatrixXd::Identity(2, 2));
  const auto b = stats(VectorXd::Zero(3), MatrixXd::Identity(3, 3));
  EXPECT_THROW(frechet_distance(a, b), UsageError);
}

}  // namespace
}  // namespace tgeval
