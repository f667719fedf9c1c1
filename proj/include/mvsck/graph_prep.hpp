#pragma once

#include "mvsck/common.hpp"
#include "mvsck/data_model.hpp"

#include <Eigen/SparseCore>

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace mvsck {

enum class Normalization {
    sym_selfloop, ///< D~^{-1/2} (A + I) D~^{-1/2}, D~ the degrees of A + I
    sym,          ///< D^{-1/2} A D^{-1/2}; zero-degree rows stay zero
    row,          ///< D^{-1} A; zero-degree rows stay zero
};

inline const char* to_string(Normalization n) {
    switch (n) {
    case Normalization::sym_selfloop: return "sym_selfloop";
    case Normalization::sym: return "sym";
    case Normalization::row: return "row";
    }
    return "?";
}

inline std::optional<Normalization> parse_normalization(std::string_view s) {
    if (s == "sym_selfloop") return Normalization::sym_selfloop;
    if (s == "sym") return Normalization::sym;
    if (s == "row") return Normalization::row;
    return std::nullopt;
}

/// Propagation operator built once from a graph; the normalized sparse matrix is cached.
class NormalizedAdjacency {
public:
    using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

    NormalizedAdjacency(const SparseGraph& graph, Normalization normalization = Normalization::sym_selfloop)
        : normalization_(normalization) {
        SparseMatrix a = graph.to_sparse();
        const Index n = a.rows();
        if (normalization == Normalization::sym_selfloop) {
            SparseMatrix identity(n, n);
            identity.setIdentity();
            a = a + identity;
        }
        degrees_ = a * Vector::Ones(n);
        Vector scale(n);
        for (Index i = 0; i < n; ++i) {
            const double d = degrees_(i);
            if (d <= 0.0) {
                scale(i) = 0.0;
            } else {
                scale(i) = normalization == Normalization::row ? 1.0 / d : 1.0 / std::sqrt(d);
            }
        }
        if (normalization == Normalization::row) {
            operator_ = scale.asDiagonal() * a;
        } else {
            operator_ = scale.asDiagonal() * a * scale.asDiagonal();
        }
        operator_.makeCompressed();
    }

    Index n() const noexcept { return operator_.rows(); }
    Normalization normalization() const noexcept { return normalization_; }
    /// Row sums of the (self-loop augmented, for sym_selfloop) adjacency.
    const Vector& degrees() const noexcept { return degrees_; }
    const SparseMatrix& matrix() const noexcept { return operator_; }

private:
    Normalization normalization_;
    Vector degrees_;
    SparseMatrix operator_;
};

/// Laplacian smoothing X <- A^p X as p sparse-dense products. p = 0 returns X unchanged.
inline FeatureMatrix propagate(const NormalizedAdjacency& adj, const FeatureMatrix& features, int p,
                               const Deadline* deadline = nullptr) {
    require(p >= 0, "propagation order must be nonnegative");
    require(adj.n() == features.n(), "adjacency has " + std::to_string(adj.n()) + " nodes but features have " +
                                         std::to_string(features.n()) + " rows");
    if (p == 0) return features;
    DenseMatrix x = features.values();
    DenseMatrix next(x.rows(), x.cols());
    for (int step = 0; step < p; ++step) {
        check_deadline(deadline, "propagation");
        next.noalias() = adj.matrix() * x;
        x.swap(next);
    }
    if (!x.allFinite()) throw NumericError("propagation produced non-finite values");
    return FeatureMatrix(std::move(x));
}

/// Content fingerprint of one propagation job; used as the cache file name.
inline std::string propagation_key(const SparseGraph& graph, const FeatureMatrix& features, int p,
                                   Normalization normalization) {
    Fnv1a h;
    h.update("mvsck-propagation-v1");
    h.update_value(p);
    h.update(to_string(normalization));
    h.update_value(graph.n());
    for (const auto& e : graph.edges()) {
        h.update_value(e.row);
        h.update_value(e.col);
        h.update_value(e.weight);
    }
    h.update_value(features.n());
    h.update_value(features.d());
    h.update(features.values().data(), sizeof(double) * static_cast<std::size_t>(features.values().size()));
    return h.hex();
}

/// propagate() backed by an on-disk cache in the feature-file format.
inline FeatureMatrix propagate_cached(const std::filesystem::path& cache_dir, const SparseGraph& graph,
                                      const FeatureMatrix& features, int p, Normalization normalization,
                                      bool* cache_hit = nullptr) {
    const auto path = cache_dir / (propagation_key(graph, features, p, normalization) + ".f64");
    if (std::filesystem::exists(path)) {
        FeatureMatrix cached = io::read_features(path);
        if (cached.n() == features.n() && cached.d() == features.d()) {
            if (cache_hit) *cache_hit = true;
            return cached;
        }
    }
    if (cache_hit) *cache_hit = false;
    FeatureMatrix out = propagate(NormalizedAdjacency(graph, normalization), features, p);
    std::filesystem::create_directories(cache_dir);
    const auto tmp = path.string() + ".tmp";
    io::write_features(out, tmp);
    std::filesystem::rename(tmp, path);
    return out;
}

/// Returns a copy of the dataset whose view features have been smoothed with each view's
/// propagation order; their orders are reset to 0. Views without any usable graph pass through.
inline MultiViewDataset propagate_dataset(const MultiViewDataset& dataset, Normalization normalization,
                                          const std::optional<std::filesystem::path>& cache_dir = std::nullopt) {
    std::vector<View> views = dataset.views();
    for (std::size_t v = 0; v < views.size(); ++v) {
        const int p = views[v].propagation_order;
        const SparseGraph* graph = dataset.propagation_graph(v);
        if (p == 0 || graph == nullptr) continue;
        views[v].features = cache_dir ? propagate_cached(*cache_dir, *graph, views[v].features, p, normalization)
                                      : propagate(NormalizedAdjacency(*graph, normalization), views[v].features, p);
        views[v].propagation_order = 0;
    }
    return MultiViewDataset(std::move(views), dataset.labels());
}

} // namespace mvsck
