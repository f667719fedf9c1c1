#include "mvsck/kernel_maps.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace mvsck;

namespace {

DenseMatrix row(std::initializer_list<double> values) {
    DenseMatrix m(1, static_cast<Index>(values.size()));
    Index j = 0;
    for (double v : values) m(0, j++) = v;
    return m;
}

double exact_kernel(KernelKind kind, double gamma, double coef0, const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) {
    switch (kind) {
    case KernelKind::rbf_nystroem: return std::exp(-gamma * (a - b).squaredNorm());
    case KernelKind::sigmoid_nystroem: return std::tanh(gamma * a.dot(b) + coef0);
    default: return std::pow(a.dot(b), 2);
    }
}

} // namespace

TEST(QuadraticMap, OutputDimension) {
    EXPECT_EQ(quadratic_output_dim(3), 6);
    const auto map = fit_kernel_map(KernelKind::quadratic_exact, oracle::random_dense(5, 3, 1), 0, {}, 0);
    EXPECT_EQ(map.output_dim, 6);
    EXPECT_TRUE(map.exact());
}

TEST(QuadraticMap, UnitVectorImage) {
    const auto u = row({1, 0});
    const auto map = fit_kernel_map(KernelKind::quadratic_exact, u, 0, {}, 0);
    const auto b = apply_map(map, u);
    ASSERT_EQ(b.m(), 3);
    EXPECT_EQ(b.values(0, 0), 1.0);
    EXPECT_EQ(b.values(0, 1), 0.0);
    EXPECT_EQ(b.values(0, 2), 0.0);
}

TEST(QuadraticMap, InnerProductIsSquaredDot) {
    DenseMatrix u(2, 2);
    u << 1, 2, 3, 4;
    const auto map = fit_kernel_map(KernelKind::quadratic_exact, u, 0, {}, 0);
    const auto b = apply_map(map, u);
    EXPECT_NEAR(b.values.row(0).dot(b.values.row(1)), 121.0, 1e-12);
}

TEST(QuadraticMap, GramEqualsSquaredLinearKernelAndIsNonnegative) {
    const DenseMatrix u = oracle::random_dense(40, 5, 3);
    const auto b = apply_map(fit_kernel_map(KernelKind::quadratic_exact, u, 0, {}, 0), u);
    const Eigen::MatrixXd gram = b.values * b.values.transpose();
    const Eigen::MatrixXd expect = (u * u.transpose()).array().square().matrix();
    EXPECT_LT((gram - expect).cwiseAbs().maxCoeff(), 1e-12 * expect.cwiseAbs().maxCoeff());
    EXPECT_GE(gram.minCoeff(), -1e-12);
}

TEST(Nystroem, AllLandmarksReproduceRbfKernel) {
    const Index n = 150;
    const DenseMatrix u = oracle::random_dense(n, 4, 5, 0.5);
    const auto map = fit_kernel_map(KernelKind::rbf_nystroem, u, n, {}, 7);
    const auto b = apply_map(map, u);
    EXPECT_EQ(b.m(), n);
    const Eigen::MatrixXd gram = b.values * b.values.transpose();
    double worst = 0.0;
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            worst = std::max(worst, std::abs(gram(i, j) - exact_kernel(KernelKind::rbf_nystroem, map.gamma, 0.0,
                                                                        u.row(i), u.row(j))));
    EXPECT_LT(worst, 1e-6);
}

TEST(Nystroem, RandomPairsMatchExactRbf) {
    const Index n = 120;
    const DenseMatrix u = oracle::random_dense(n, 3, 9, 0.4);
    KernelParams params;
    params.gamma = 0.8;
    const auto b = apply_map(fit_kernel_map(KernelKind::rbf_nystroem, u, n, params, 1), u);
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<Index> pick(0, n - 1);
    for (int t = 0; t < 100; ++t) {
        const Index i = pick(rng), j = pick(rng);
        EXPECT_NEAR(b.values.row(i).dot(b.values.row(j)), std::exp(-0.8 * (u.row(i) - u.row(j)).squaredNorm()), 1e-6);
    }
}

TEST(Nystroem, LandmarksDeterministicAndUniformWithoutReplacement) {
    const DenseMatrix u = oracle::random_dense(500, 5, 2);
    const auto a = fit_kernel_map(KernelKind::sigmoid_nystroem, u, 50, {}, 11);
    const auto b = fit_kernel_map(KernelKind::sigmoid_nystroem, u, 50, {}, 11);
    EXPECT_EQ(a.landmark_rows, b.landmark_rows);
    EXPECT_EQ(a.whitening, b.whitening);
    auto rows = a.landmark_rows;
    std::sort(rows.begin(), rows.end());
    EXPECT_EQ(std::adjacent_find(rows.begin(), rows.end()), rows.end());
    const auto c = fit_kernel_map(KernelKind::sigmoid_nystroem, u, 50, {}, 12);
    EXPECT_NE(a.landmark_rows, c.landmark_rows);
}

TEST(Nystroem, DefaultsAreScaleFree) {
    const DenseMatrix u = oracle::random_dense(30, 6, 2);
    const auto map = fit_kernel_map(KernelKind::sigmoid_nystroem, u, 10, {}, 0);
    EXPECT_DOUBLE_EQ(map.gamma, 1.0 / 6.0);
    EXPECT_EQ(map.coef0, 1.0);
    EXPECT_EQ(map.output_dim, 10);
}

TEST(Nystroem, TooManyComponents) {
    const DenseMatrix u = oracle::random_dense(10, 2, 1);
    EXPECT_THROW(fit_kernel_map(KernelKind::rbf_nystroem, u, 11, {}, 0), ConfigError);
}

TEST(Nystroem, DuplicateLandmarksAreFlooredNotInverted) {
    DenseMatrix u = DenseMatrix::Zero(6, 2);
    u.row(5) << 1.0, 1.0;
    const auto map = fit_kernel_map(KernelKind::rbf_nystroem, u, 6, {}, 0);
    EXPECT_GT(map.floored_eigenvalues, 0);
    const auto b = apply_map(map, u);
    EXPECT_TRUE(b.values.allFinite());
    const Eigen::MatrixXd gram = b.values * b.values.transpose();
    EXPECT_NEAR(gram(0, 1), 1.0, 1e-8);
    EXPECT_NEAR(gram(0, 5), std::exp(-0.5 * 2.0), 1e-8);
}

TEST(Nystroem, SingularLandmarkKernelRejected) {
    const DenseMatrix u = DenseMatrix::Zero(5, 2);
    KernelParams flat;
    flat.coef0 = 0.0;
    EXPECT_THROW(fit_kernel_map(KernelKind::sigmoid_nystroem, u, 3, flat, 0), NumericError);
}

TEST(ApplyMap, DimensionMismatch) {
    const auto map = fit_kernel_map(KernelKind::quadratic_exact, oracle::random_dense(4, 3, 1), 0, {}, 0);
    EXPECT_THROW(apply_map(map, oracle::random_dense(4, 2, 1)), ConfigError);
}

TEST(Concatenate, InnerProductsAddUp) {
    const DenseMatrix u = oracle::random_dense(20, 3, 4);
    const auto qa = apply_map(fit_kernel_map(KernelKind::quadratic_exact, u, 0, {}, 0), u);
    const auto rb = apply_map(fit_kernel_map(KernelKind::rbf_nystroem, u, 8, {}, 1), u);
    const std::vector<FactorMatrix> blocks{qa, rb};
    const std::vector<double> ones{1.0, 1.0};
    const auto both = concatenate(blocks, ones);
    const Eigen::MatrixXd lhs = both.values * both.values.transpose();
    const Eigen::MatrixXd rhs = qa.values * qa.values.transpose() + rb.values * rb.values.transpose();
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12 * rhs.cwiseAbs().maxCoeff());
}

TEST(Concatenate, SqrtScaleInducesScaledKernel) {
    const DenseMatrix u = oracle::random_dense(15, 4, 6);
    const auto b = apply_map(fit_kernel_map(KernelKind::quadratic_exact, u, 0, {}, 0), u);
    const double lambda = 0.37;
    const std::vector<FactorMatrix> blocks{b};
    const std::vector<double> scale{std::sqrt(lambda)};
    const auto scaled = concatenate(blocks, scale);
    const Eigen::MatrixXd lhs = scaled.values * scaled.values.transpose();
    const Eigen::MatrixXd rhs = lambda * (b.values * b.values.transpose());
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12 * rhs.cwiseAbs().maxCoeff());
}

TEST(KernelKind, NamesRoundTrip) {
    for (auto k : {KernelKind::quadratic_exact, KernelKind::rbf_nystroem, KernelKind::sigmoid_nystroem})
        EXPECT_EQ(parse_kernel_kind(to_string(k)), k);
    EXPECT_FALSE(parse_kernel_kind("poly"));
}
