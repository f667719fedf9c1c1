#pragma once

#include "mvsck/common.hpp"

#include <utility>

namespace mvsck {

/// n x m factor B standing in for the affinity W = B B^T, which is never formed.
struct FactorMatrix {
    DenseMatrix values;
    bool degree_normalized = false;

    FactorMatrix() = default;
    explicit FactorMatrix(DenseMatrix v, bool normalized = false)
        : values(std::move(v)), degree_normalized(normalized) {}

    Index n() const noexcept { return values.rows(); }
    Index m() const noexcept { return values.cols(); }
};

} // namespace mvsck
