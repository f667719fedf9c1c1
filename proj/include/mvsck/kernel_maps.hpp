#pragma once

#include "mvsck/common.hpp"
#include "mvsck/factor_matrix.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace mvsck {

enum class KernelKind { quadratic_exact, rbf_nystroem, sigmoid_nystroem };

inline const char* to_string(KernelKind kind) {
    switch (kind) {
    case KernelKind::quadratic_exact: return "quadratic";
    case KernelKind::rbf_nystroem: return "rbf";
    case KernelKind::sigmoid_nystroem: return "sigmoid";
    }
    return "?";
}

inline std::optional<KernelKind> parse_kernel_kind(std::string_view s) {
    if (s == "quadratic") return KernelKind::quadratic_exact;
    if (s == "rbf") return KernelKind::rbf_nystroem;
    if (s == "sigmoid") return KernelKind::sigmoid_nystroem;
    return std::nullopt;
}

struct KernelParams {
    /// RBF width, or sigmoid slope. Defaults to 1 / input_dim.
    std::optional<double> gamma;
    /// Sigmoid intercept.
    double coef0 = 1.0;
};

/// Fitted explicit feature map. Nystroem maps carry their landmarks and the symmetric
/// inverse square root of the landmark kernel matrix.
struct KernelMap {
    KernelKind kind = KernelKind::quadratic_exact;
    Index input_dim = 0;
    Index output_dim = 0;
    double gamma = 0.0;
    double coef0 = 0.0;
    DenseMatrix landmarks;
    DenseMatrix whitening;
    std::vector<Index> landmark_rows;
    std::uint64_t seed = 0;
    /// Landmark-kernel eigenvalues at or below the floor; their directions are dropped.
    Index floored_eigenvalues = 0;

    bool exact() const noexcept { return kind == KernelKind::quadratic_exact; }
};

inline constexpr Index quadratic_output_dim(Index f) { return f * (f + 1) / 2; }

/// Pairwise kernel values k(a_i, b_j) for the Nystroem kernels.
inline DenseMatrix kernel_matrix(KernelKind kind, double gamma, double coef0, const DenseMatrix& a, const DenseMatrix& b) {
    DenseMatrix k = a * b.transpose();
    if (kind == KernelKind::rbf_nystroem) {
        const Vector na = a.rowwise().squaredNorm();
        const Vector nb = b.rowwise().squaredNorm();
        for (Index i = 0; i < k.rows(); ++i)
            for (Index j = 0; j < k.cols(); ++j) {
                const double sq = std::max(0.0, na(i) + nb(j) - 2.0 * k(i, j));
                k(i, j) = std::exp(-gamma * sq);
            }
    } else if (kind == KernelKind::sigmoid_nystroem) {
        k = (gamma * k.array() + coef0).tanh().matrix();
    } else {
        k = k.array().square().matrix();
    }
    return k;
}

inline KernelMap fit_kernel_map(KernelKind kind, const DenseMatrix& u, Index components, const KernelParams& params,
                                std::uint64_t seed) {
    KernelMap map;
    map.kind = kind;
    map.input_dim = u.cols();
    map.seed = seed;
    require(u.cols() >= 1, "kernel map needs at least one input column");
    map.gamma = params.gamma.value_or(1.0 / static_cast<double>(u.cols()));
    map.coef0 = params.coef0;
    if (kind == KernelKind::quadratic_exact) {
        map.output_dim = quadratic_output_dim(u.cols());
        return map;
    }

    const Index n = u.rows();
    require(components >= 1, "Nystroem needs at least one component");
    require(components <= n, "Nystroem components (" + std::to_string(components) + ") exceed n (" +
                                 std::to_string(n) + ")");
    std::vector<Index> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), Index{0});
    map.landmark_rows.resize(static_cast<std::size_t>(components));
    std::mt19937_64 rng(seed);
    std::sample(all.begin(), all.end(), map.landmark_rows.begin(), components, rng);

    map.landmarks.resize(components, u.cols());
    for (Index i = 0; i < components; ++i) map.landmarks.row(i) = u.row(map.landmark_rows[static_cast<std::size_t>(i)]);

    const DenseMatrix kmm = kernel_matrix(kind, map.gamma, map.coef0, map.landmarks, map.landmarks);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Eigen::MatrixXd(kmm), Eigen::ComputeEigenvectors);
    if (eig.info() != Eigen::Success) throw NumericError("landmark kernel eigendecomposition failed");
    const Vector& lambda = eig.eigenvalues();
    const double lambda_max = lambda.maxCoeff();
    if (!(lambda_max > 0.0)) throw NumericError("landmark kernel matrix is numerically singular");
    const double floor = 1e-12 * lambda_max;
    Vector inv_sqrt(components);
    for (Index i = 0; i < components; ++i) {
        if (lambda(i) > floor) {
            inv_sqrt(i) = 1.0 / std::sqrt(lambda(i));
        } else {
            inv_sqrt(i) = 0.0;
            ++map.floored_eigenvalues;
        }
    }
    const Eigen::MatrixXd& vecs = eig.eigenvectors();
    map.whitening = vecs * inv_sqrt.asDiagonal() * vecs.transpose();
    map.output_dim = components;
    return map;
}

/// Row i of the result is Phi(u_i). For the quadratic map the layout is
/// [u_j^2 for all j] ++ [sqrt(2) u_j u_l for j < l], so Phi(u).Phi(v) = (u.v)^2.
inline FactorMatrix apply_map(const KernelMap& map, const DenseMatrix& u) {
    require(u.cols() == map.input_dim, "apply_map: input has " + std::to_string(u.cols()) + " columns, map expects " +
                                           std::to_string(map.input_dim));
    if (map.kind == KernelKind::quadratic_exact) {
        const Index f = map.input_dim;
        DenseMatrix out(u.rows(), map.output_dim);
        const double root2 = std::sqrt(2.0);
        for (Index i = 0; i < u.rows(); ++i) {
            Index c = 0;
            for (Index j = 0; j < f; ++j) out(i, c++) = u(i, j) * u(i, j);
            for (Index j = 0; j < f; ++j)
                for (Index l = j + 1; l < f; ++l) out(i, c++) = root2 * u(i, j) * u(i, l);
        }
        return FactorMatrix(std::move(out));
    }
    const DenseMatrix knm = kernel_matrix(map.kind, map.gamma, map.coef0, u, map.landmarks);
    return FactorMatrix(knm * map.whitening);
}

/// Horizontal concatenation [s_0 B_0, s_1 B_1, ...]; the implicit kernel is sum_v s_v^2 B_v B_v^T.
inline FactorMatrix concatenate(std::span<const FactorMatrix> blocks, std::span<const double> scales) {
    require(!blocks.empty(), "concatenate: no blocks");
    require(blocks.size() == scales.size(), "concatenate: one scale per block required");
    const Index n = blocks.front().n();
    Index total = 0;
    for (const auto& b : blocks) {
        require(b.n() == n, "concatenate: blocks disagree on row count");
        total += b.m();
    }
    DenseMatrix out(n, total);
    Index offset = 0;
    for (std::size_t v = 0; v < blocks.size(); ++v) {
        out.middleCols(offset, blocks[v].m()) = scales[v] * blocks[v].values;
        offset += blocks[v].m();
    }
    return FactorMatrix(std::move(out));
}

} // namespace mvsck
