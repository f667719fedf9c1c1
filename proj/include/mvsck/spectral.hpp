#pragma once

#include "mvsck/common.hpp"
#include "mvsck/factor_matrix.hpp"
#include "mvsck/linalg.hpp"

#include <algorithm>

namespace mvsck {

struct Degrees {
    Vector values;
    /// Entries that were <= 0 before flooring (possible with the sigmoid kernel).
    Index nonpositive = 0;
    double floor = 0.0;
};

/// Row sums of B B^T as B (B^T 1): O(nm) time, O(n + m) extra memory. Entries below
/// 1e-12 * max(d) are raised to that floor.
inline Degrees implicit_degrees(const FactorMatrix& b) {
    require(!b.degree_normalized, "implicit_degrees: factor is already degree-normalized");
    const Vector column_sums = b.values.colwise().sum().transpose();
    Degrees out;
    out.values.noalias() = b.values * column_sums;
    const double max_degree = out.values.size() > 0 ? out.values.maxCoeff() : 0.0;
    out.floor = max_degree > 0.0 ? 1e-12 * max_degree : 1.0;
    for (Index i = 0; i < out.values.size(); ++i) {
        if (out.values(i) <= 0.0) ++out.nonpositive;
        if (!(out.values(i) >= out.floor)) out.values(i) = out.floor;
    }
    return out;
}

/// Scales row i by d_i^{-1/2}, so the implicit affinity becomes D^{-1/2} B B^T D^{-1/2}.
inline FactorMatrix degree_normalize(const FactorMatrix& b, const Vector& degrees) {
    require(degrees.size() == b.n(), "degree_normalize: degree vector has wrong length");
    for (Index i = 0; i < degrees.size(); ++i)
        if (!(degrees(i) > 0.0)) throw NumericError("degree_normalize: nonpositive degree at row " + std::to_string(i));
    const Vector scale = degrees.array().rsqrt().matrix();
    return FactorMatrix(scale.asDiagonal() * b.values, true);
}

struct SpectralEmbedding {
    DenseMatrix coords;
    bool dropped_first = true;
    Vector singular_values;
};

/// Leading left singular vectors of a degree-normalized factor, which span the leading
/// eigenspace of the normalized affinity. With `drop_first`, r + 1 vectors are computed and
/// the first (quasi-constant) one is discarded.
inline SpectralEmbedding spectral_embedding(const FactorMatrix& b, Index r, bool drop_first = true,
                                            const SvdOptions& svd = {}, std::uint64_t seed = 0,
                                            const Deadline* deadline = nullptr) {
    require(b.degree_normalized, "spectral_embedding: factor must be degree-normalized");
    require(r >= 1, "spectral_embedding: r must be positive");
    const Index needed = drop_first ? r + 1 : r;
    const Index min_dim = std::min(b.n(), b.m());
    if (needed > min_dim)
        throw ConfigError("spectral_embedding: " + std::to_string(needed) + " singular vectors requested but factor is " +
                          std::to_string(b.n()) + " x " + std::to_string(b.m()) + " (kernel map too small?)");
    TruncatedSVDResult res = truncated_svd(b.values, needed, svd, seed, deadline);
    SpectralEmbedding out;
    out.dropped_first = drop_first;
    out.singular_values = std::move(res.singular_values);
    out.coords = drop_first ? DenseMatrix(res.left_vectors.rightCols(r)) : std::move(res.left_vectors);
    return out;
}

} // namespace mvsck
