#include "mvsck/linalg.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace mvsck;

namespace {

double orthonormality_error(const DenseMatrix& q) {
    const Eigen::MatrixXd gram = q.transpose() * q;
    return (gram - Eigen::MatrixXd::Identity(q.cols(), q.cols())).cwiseAbs().maxCoeff();
}

/// Matrix with prescribed singular values and random orthonormal factors.
DenseMatrix with_spectrum(Index rows, Index cols, const Eigen::VectorXd& sigma, std::uint64_t seed) {
    const Eigen::MatrixXd u = oracle::orthonormalize(oracle::random_matrix(rows, sigma.size(), seed));
    const Eigen::MatrixXd v = oracle::orthonormalize(oracle::random_matrix(cols, sigma.size(), seed + 1));
    return u * sigma.asDiagonal() * v.transpose();
}

double rank_r_error(const DenseMatrix& x, const TruncatedSVDResult& s) {
    const DenseMatrix approx = s.left_vectors * s.singular_values.asDiagonal() * s.right_vectors.transpose();
    return (x - approx).norm();
}

} // namespace

TEST(CenterColumns, TwoPointMean) {
    DenseMatrix x(2, 1);
    x << 1, 3;
    const DenseMatrix c = center_columns(x);
    EXPECT_EQ(c(0, 0), -1.0);
    EXPECT_EQ(c(1, 0), 1.0);
}

TEST(CenterColumns, IdempotentAndZeroSum) {
    const DenseMatrix x = oracle::random_dense(50, 7, 3, 5.0);
    const DenseMatrix c = center_columns(x);
    const double scale = x.cwiseAbs().maxCoeff();
    for (Index j = 0; j < 7; ++j) EXPECT_LT(std::abs(c.col(j).sum()), 1e-9 * 50 * scale);
    EXPECT_LT((center_columns(c) - c).cwiseAbs().maxCoeff(), 1e-12 * scale);
    EXPECT_THROW(center_columns(DenseMatrix(0, 3)), ConfigError);
}

TEST(ExactSvd, IdentityAndZero) {
    const auto id = exact_svd_small(DenseMatrix::Identity(3, 3));
    EXPECT_LT((id.singular_values - Eigen::Vector3d::Ones()).cwiseAbs().maxCoeff(), 1e-15);
    const auto zero = exact_svd_small(DenseMatrix::Zero(2, 2));
    EXPECT_EQ(zero.singular_values, Eigen::Vector2d::Zero());
}

TEST(ExactSvd, ReconstructsRandomMatrix) {
    for (auto [r, c] : {std::pair<Index, Index>{30, 20}, {20, 30}, {200, 15}}) {
        const DenseMatrix x = oracle::random_dense(r, c, 9);
        const auto s = exact_svd_small(x);
        EXPECT_LT(rank_r_error(x, s), 1e-10) << r << "x" << c;
        EXPECT_LT(orthonormality_error(s.left_vectors), 1e-10);
        EXPECT_LT(orthonormality_error(s.right_vectors), 1e-10);
        for (Index i = 1; i < s.rank(); ++i) EXPECT_LE(s.singular_values(i), s.singular_values(i - 1));
    }
}

TEST(ExactSvd, SizeGuard) {
    EXPECT_THROW(exact_svd_small(DenseMatrix::Zero(2049, 2049)), ConfigError);
}

TEST(ExactSvd, SignConventionLargestEntryPositive) {
    const auto s = exact_svd_small(oracle::random_dense(25, 6, 4));
    for (Index j = 0; j < s.rank(); ++j) {
        Index arg = 0;
        s.left_vectors.col(j).cwiseAbs().maxCoeff(&arg);
        EXPECT_GT(s.left_vectors(arg, j), 0.0);
    }
}

TEST(RandomizedSvd, DiagonalExample) {
    DenseMatrix x = DenseMatrix::Zero(3, 3);
    x.diagonal() << 3, 2, 1;
    const auto s = randomized_svd(x, 2, 10, 4, 1);
    EXPECT_NEAR(s.singular_values(0), 3.0, 1e-10);
    EXPECT_NEAR(s.singular_values(1), 2.0, 1e-10);
}

TEST(RandomizedSvd, ExactRankRecovery) {
    const DenseMatrix x = oracle::random_matrix(50, 5, 1) * oracle::random_matrix(5, 40, 2);
    const auto s = randomized_svd(x, 5, 10, 4, 3);
    EXPECT_LT(rank_r_error(x, s), 1e-8);
}

TEST(RandomizedSvd, NearOptimalOnPolynomialDecay) {
    Eigen::VectorXd sigma(80);
    for (Index i = 0; i < 80; ++i) sigma(i) = 1.0 / static_cast<double>((i + 1) * (i + 1));
    const DenseMatrix x = with_spectrum(200, 80, sigma, 42);
    const auto oracle_svd = Eigen::JacobiSVD<Eigen::MatrixXd>(Eigen::MatrixXd(x));
    const double optimal = oracle_svd.singularValues().tail(70).norm();
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto s = randomized_svd(x, 10, 10, 4, seed);
        EXPECT_LE(rank_r_error(x, s), 1.05 * optimal) << "seed " << seed;
    }
}

TEST(RandomizedSvd, SingularTripletResidualsAndOrthonormality) {
    Eigen::VectorXd sigma(60);
    for (Index i = 0; i < 60; ++i) sigma(i) = std::pow(0.7, static_cast<double>(i));
    const DenseMatrix x = with_spectrum(300, 60, sigma, 5);
    const auto s = randomized_svd(x, 8, 10, 4, 9);
    EXPECT_LT(orthonormality_error(s.left_vectors), 1e-8);
    EXPECT_LT(orthonormality_error(s.right_vectors), 1e-8);
    for (Index i = 0; i < 8; ++i) {
        const double residual = (x.transpose() * s.left_vectors.col(i) - s.singular_values(i) * s.right_vectors.col(i)).norm();
        EXPECT_LE(residual, 1e-6 * s.singular_values(0)) << i;
    }
}

TEST(RandomizedSvd, DeterministicPerSeed) {
    const DenseMatrix x = oracle::random_dense(120, 40, 8);
    const auto a = randomized_svd(x, 6, 10, 4, 77);
    const auto b = randomized_svd(x, 6, 10, 4, 77);
    EXPECT_EQ(a.left_vectors, b.left_vectors);
    EXPECT_EQ(a.singular_values, b.singular_values);
}

TEST(RandomizedSvd, RankOutOfRange) {
    const DenseMatrix x = oracle::random_dense(10, 4, 1);
    EXPECT_THROW(randomized_svd(x, 5, 10, 4, 0), ConfigError);
    EXPECT_THROW(randomized_svd(x, 0, 10, 4, 0), ConfigError);
    EXPECT_THROW(truncated_svd(x, 5, {}, 0), ConfigError);
}

TEST(RandomizedSvd, MatchesExactOnWellSeparatedSpectrum) {
    Eigen::VectorXd sigma(30);
    for (Index i = 0; i < 30; ++i) sigma(i) = 100.0 / static_cast<double>(1 << std::min<Index>(i, 20));
    const DenseMatrix x = with_spectrum(500, 90, sigma, 2);
    SvdOptions randomized;
    randomized.method = SvdMethod::randomized;
    SvdOptions exact;
    exact.method = SvdMethod::exact;
    const auto a = truncated_svd(x, 5, randomized, 3);
    const auto b = truncated_svd(x, 5, exact, 3);
    EXPECT_LT((a.singular_values - b.singular_values).cwiseAbs().maxCoeff(), 1e-9 * sigma(0));
    EXPECT_LT((a.left_vectors - b.left_vectors).cwiseAbs().maxCoeff(), 1e-8);
}
