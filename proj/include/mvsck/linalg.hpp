#pragma once

#include "mvsck/common.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <random>

namespace mvsck {

struct TruncatedSVDResult {
    DenseMatrix left_vectors;  ///< rows x r, orthonormal columns
    Vector singular_values;    ///< length r, nonincreasing
    DenseMatrix right_vectors; ///< cols x r, orthonormal columns

    Index rank() const noexcept { return singular_values.size(); }
};

enum class SvdMethod { automatic, exact, randomized };

struct SvdOptions {
    Index oversample = 10;
    int power_iters = 4;
    SvdMethod method = SvdMethod::automatic;
    /// Under `automatic`, matrices whose smaller dimension is at most this go to the exact solver.
    Index exact_threshold = 64;
};

inline DenseMatrix center_columns(const DenseMatrix& x) {
    require(x.rows() >= 1, "center_columns needs at least one row");
    const Eigen::RowVectorXd mean = x.colwise().mean();
    return x.rowwise() - mean;
}

namespace detail {

/// Flips each left singular vector so its largest-magnitude entry is positive (first index on
/// ties) and mirrors the flip on the right vector.
inline void canonicalize_signs(TruncatedSVDResult& svd) {
    for (Index j = 0; j < svd.left_vectors.cols(); ++j) {
        Index arg = 0;
        double best = -1.0;
        for (Index i = 0; i < svd.left_vectors.rows(); ++i) {
            const double a = std::abs(svd.left_vectors(i, j));
            if (a > best) {
                best = a;
                arg = i;
            }
        }
        if (svd.left_vectors(arg, j) < 0.0) {
            svd.left_vectors.col(j) *= -1.0;
            svd.right_vectors.col(j) *= -1.0;
        }
    }
}

inline Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& y) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
    return qr.householderQ() * Eigen::MatrixXd::Identity(y.rows(), y.cols());
}

template <class Svd>
TruncatedSVDResult unpack_svd(const Svd& svd) {
    TruncatedSVDResult out;
    out.left_vectors = svd.matrixU();
    out.singular_values = svd.singularValues();
    out.right_vectors = svd.matrixV();
    return out;
}

/// Thin SVD; one-sided Jacobi up to 256 columns, divide-and-conquer above.
inline TruncatedSVDResult square_svd(const Eigen::MatrixXd& x) {
    if (x.cols() <= 256)
        return unpack_svd(Eigen::JacobiSVD<Eigen::MatrixXd>(x, Eigen::ComputeThinU | Eigen::ComputeThinV));
    return unpack_svd(Eigen::BDCSVD<Eigen::MatrixXd>(x, Eigen::ComputeThinU | Eigen::ComputeThinV));
}

inline TruncatedSVDResult dense_svd(const Eigen::MatrixXd& x) {
    TruncatedSVDResult out;
    if (x.rows() >= x.cols()) {
        if (x.rows() > 2 * x.cols()) {
            // Tall: reduce to the cols x cols triangular factor first.
            Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
            const Eigen::MatrixXd r = qr.matrixQR().topRows(x.cols()).triangularView<Eigen::Upper>();
            const TruncatedSVDResult core = square_svd(r);
            const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(x.rows(), x.cols());
            out.left_vectors = q * core.left_vectors;
            out.singular_values = core.singular_values;
            out.right_vectors = core.right_vectors;
        } else {
            out = square_svd(x);
        }
    } else {
        TruncatedSVDResult t = dense_svd(x.transpose());
        out.left_vectors = std::move(t.right_vectors);
        out.singular_values = std::move(t.singular_values);
        out.right_vectors = std::move(t.left_vectors);
    }
    return out;
}

inline void truncate(TruncatedSVDResult& svd, Index r) {
    if (svd.rank() == r) return;
    svd.left_vectors = svd.left_vectors.leftCols(r).eval();
    svd.right_vectors = svd.right_vectors.leftCols(r).eval();
    svd.singular_values = svd.singular_values.head(r).eval();
}

} // namespace detail

/// Full thin SVD by dense decomposition, min(rows, cols) components.
inline TruncatedSVDResult exact_svd_small(const DenseMatrix& x) {
    require(std::min(x.rows(), x.cols()) <= 2048,
            "exact_svd_small: smaller dimension " + std::to_string(std::min(x.rows(), x.cols())) + " exceeds 2048");
    TruncatedSVDResult out = detail::dense_svd(Eigen::MatrixXd(x));
    detail::canonicalize_signs(out);
    return out;
}

/// Randomized range finder with subspace (power) iterations followed by an exact SVD of the
/// small projected matrix. Gaussian sketch drawn from `seed`.
inline TruncatedSVDResult randomized_svd(const DenseMatrix& x, Index r, Index oversample, int power_iters,
                                         std::uint64_t seed, const Deadline* deadline = nullptr) {
    const Index rows = x.rows();
    const Index cols = x.cols();
    require(r >= 1 && r <= std::min(rows, cols), "randomized_svd: rank " + std::to_string(r) + " outside [1, " +
                                                      std::to_string(std::min(rows, cols)) + "]");
    require(oversample >= 0, "randomized_svd: oversample must be nonnegative");
    require(power_iters >= 0, "randomized_svd: power_iters must be nonnegative");
    const Index sketch = std::min(r + oversample, std::min(rows, cols));

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd omega(cols, sketch);
    for (Index j = 0; j < sketch; ++j)
        for (Index i = 0; i < cols; ++i) omega(i, j) = normal(rng);

    Eigen::MatrixXd q = detail::orthonormal_basis(x * omega);
    for (int it = 0; it < power_iters; ++it) {
        check_deadline(deadline, "randomized SVD");
        const Eigen::MatrixXd z = detail::orthonormal_basis(x.transpose() * q);
        q = detail::orthonormal_basis(x * z);
    }
    const Eigen::MatrixXd projected = q.transpose() * x;
    TruncatedSVDResult small = detail::dense_svd(projected);
    TruncatedSVDResult out;
    out.left_vectors = q * small.left_vectors.leftCols(r);
    out.singular_values = small.singular_values.head(r);
    out.right_vectors = small.right_vectors.leftCols(r);
    detail::canonicalize_signs(out);
    return out;
}

/// Leading r singular triplets, routed to the exact or randomized solver per `options`.
inline TruncatedSVDResult truncated_svd(const DenseMatrix& x, Index r, const SvdOptions& options, std::uint64_t seed,
                                        const Deadline* deadline = nullptr) {
    const Index min_dim = std::min(x.rows(), x.cols());
    require(r >= 1 && r <= min_dim,
            "truncated_svd: rank " + std::to_string(r) + " outside [1, " + std::to_string(min_dim) + "]");
    const bool exact = options.method == SvdMethod::exact ||
                       (options.method == SvdMethod::automatic && min_dim <= options.exact_threshold);
    if (!exact) return randomized_svd(x, r, options.oversample, options.power_iters, seed, deadline);
    TruncatedSVDResult out = exact_svd_small(x);
    detail::truncate(out, r);
    return out;
}

} // namespace mvsck
