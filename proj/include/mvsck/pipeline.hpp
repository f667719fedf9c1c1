#pragma once

#include "mvsck/common.hpp"
#include "mvsck/data_model.hpp"
#include "mvsck/factor_matrix.hpp"
#include "mvsck/kernel_maps.hpp"
#include "mvsck/kmeans.hpp"
#include "mvsck/linalg.hpp"
#include "mvsck/spectral.hpp"
#include "mvsck/view_weighting.hpp"

#include <chrono>
#include <exception>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace mvsck {

enum class ConcatScale { sqrt_lambda, lambda };

inline const char* to_string(ConcatScale s) { return s == ConcatScale::sqrt_lambda ? "sqrt" : "linear"; }

inline std::optional<ConcatScale> parse_concat_scale(std::string_view s) {
    if (s == "sqrt") return ConcatScale::sqrt_lambda;
    if (s == "linear") return ConcatScale::lambda;
    return std::nullopt;
}

/// Affinity used for the clusterability traces: the degree-normalized factor (default) or
/// the raw kernel factor Phi(U_v).
enum class TraceAffinity { normalized, unnormalized };

struct KernelSettings {
    KernelKind kind = KernelKind::quadratic_exact;
    /// Nystroem landmarks; 0 means 10 * k.
    Index components = 0;
    KernelParams params;
};

struct KMeansSettings {
    int max_iter = 300;
    double tol = 1e-6;
};

struct PipelineConfig {
    /// Singular vectors kept per view; 0 means f = k.
    Index f = 0;
    int k = 0;
    double temperature = 0.1;
    KernelSettings kernel;
    SvdOptions svd;
    KMeansSettings kmeans;
    WeightMode weight_mode = WeightMode::softmax;
    ConcatScale concat_scale = ConcatScale::sqrt_lambda;
    TraceAffinity trace_affinity = TraceAffinity::normalized;
    /// Spectral coordinates per embedding; 0 means f.
    Index embedding_dim = 0;
    /// Compute embedding_dim + 1 singular vectors and drop the first; otherwise keep the
    /// leading embedding_dim vectors.
    bool drop_first = true;
    std::uint64_t seed = 0;
    bool parallel_views = true;

    Index resolved_f() const { return f > 0 ? f : static_cast<Index>(k); }
    Index resolved_embedding_dim() const { return embedding_dim > 0 ? embedding_dim : resolved_f(); }
    Index resolved_components() const { return kernel.components > 0 ? kernel.components : 10 * static_cast<Index>(k); }
};

using StageTimings = std::map<std::string, double>; ///< stage name -> milliseconds

/// Everything computed for one view.
struct ViewStage {
    KernelMap map;
    FactorMatrix factor;                   ///< degree-normalized D^{-1/2} Phi(U_v)
    std::optional<FactorMatrix> raw_factor; ///< Phi(U_v), kept only when needed
    Index nonpositive_degrees = 0;
    SpectralEmbedding embedding;
    KMeansResult clustering;
    StageTimings timings;
};

struct ClusteringResult {
    Partition consensus;
    double consensus_inertia = 0.0;
    std::vector<Partition> per_view;
    ViewWeights weights;
    StageTimings timings;
    PipelineConfig config;
    Index nonpositive_degrees = 0;
    /// Normalized per-view factors; populated only when requested.
    std::vector<FactorMatrix> view_factors;
};

struct RunOptions {
    const Deadline* deadline = nullptr;
    bool keep_view_factors = false;
};

namespace detail {

enum SeedStream : std::uint64_t {
    seed_view_svd = 11,
    seed_view_kernel = 12,
    seed_view_embed = 13,
    seed_view_kmeans = 14,
    seed_consensus_embed = 21,
    seed_consensus_kmeans = 22,
};

class StageClock {
public:
    StageClock(StageTimings& timings, std::string name)
        : timings_(timings), name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}
    ~StageClock() {
        const std::chrono::duration<double, std::milli> ms = std::chrono::steady_clock::now() - start_;
        timings_[name_] += ms.count();
    }
    StageClock(const StageClock&) = delete;
    StageClock& operator=(const StageClock&) = delete;

private:
    StageTimings& timings_;
    std::string name_;
    std::chrono::steady_clock::time_point start_;
};

} // namespace detail

inline void validate_config(const PipelineConfig& config, const MultiViewDataset& dataset) {
    if (config.k < 2) throw ConfigError("k must be at least 2");
    if (config.f < 0) throw ConfigError("f must be positive");
    if (!(config.temperature > 0.0)) throw ConfigError("temperature must be positive");
    if (config.svd.oversample < 0 || config.svd.power_iters < 0) throw ConfigError("invalid SVD settings");
    if (config.kmeans.max_iter < 1 || config.kmeans.tol < 0.0) throw ConfigError("invalid k-means settings");
    const Index n = dataset.n();
    const Index f = config.resolved_f();
    const Index r = config.resolved_embedding_dim();
    const Index needed = config.drop_first ? r + 1 : r;
    if (static_cast<Index>(config.k) > n) throw ConfigError("k exceeds the number of points");
    for (std::size_t v = 0; v < dataset.num_views(); ++v) {
        const Index d = dataset.view(v).features.d();
        if (f > std::min(n, d))
            throw ConfigError("view " + std::to_string(v) + ": f=" + std::to_string(f) + " exceeds min(n, d)=" +
                              std::to_string(std::min(n, d)));
        const Index m = config.kernel.kind == KernelKind::quadratic_exact ? quadratic_output_dim(f)
                                                                          : config.resolved_components();
        if (config.kernel.kind != KernelKind::quadratic_exact && m > n)
            throw ConfigError("kernel components exceed n");
        if (needed > std::min(n, m))
            throw ConfigError("view " + std::to_string(v) + ": embedding needs " + std::to_string(needed) +
                              " singular vectors but the kernel map has dimension " + std::to_string(m));
    }
}

/// Per-view pass: center, f leading left singular vectors, kernel map, factorized degree
/// normalization, spectral embedding and k-means.
inline ViewStage run_view_stage(const DenseMatrix& features, const PipelineConfig& config, std::size_t view_index,
                                const Deadline* deadline = nullptr) {
    ViewStage out;
    const Index f = config.resolved_f();
    const auto v = static_cast<std::uint64_t>(view_index);
    DenseMatrix u;
    {
        DenseMatrix centered;
        {
            detail::StageClock clock(out.timings, "center");
            centered = center_columns(features);
        }
        check_deadline(deadline, "view SVD");
        detail::StageClock clock(out.timings, "svd");
        u = truncated_svd(centered, f, config.svd, derive_seed(config.seed, detail::seed_view_svd, v), deadline)
                .left_vectors;
    }
    FactorMatrix raw;
    {
        check_deadline(deadline, "kernel map");
        detail::StageClock clock(out.timings, "kernel");
        out.map = fit_kernel_map(config.kernel.kind, u, config.resolved_components(), config.kernel.params,
                                 derive_seed(config.seed, detail::seed_view_kernel, v));
        raw = apply_map(out.map, u);
        if (!raw.values.allFinite()) throw NumericError("kernel map produced non-finite values");
    }
    {
        detail::StageClock clock(out.timings, "normalize");
        const Degrees degrees = implicit_degrees(raw);
        out.nonpositive_degrees = degrees.nonpositive;
        out.factor = degree_normalize(raw, degrees.values);
    }
    if (config.trace_affinity == TraceAffinity::unnormalized) out.raw_factor = std::move(raw);
    {
        check_deadline(deadline, "view embedding");
        detail::StageClock clock(out.timings, "embed");
        out.embedding = spectral_embedding(out.factor, config.resolved_embedding_dim(), config.drop_first, config.svd,
                                           derive_seed(config.seed, detail::seed_view_embed, v), deadline);
    }
    {
        detail::StageClock clock(out.timings, "kmeans");
        out.clustering = kmeans(out.embedding.coords, config.k, derive_seed(config.seed, detail::seed_view_kmeans, v),
                                {config.kmeans.max_iter, config.kmeans.tol, deadline});
    }
    return out;
}

/// Full non-iterative pass: per-view stages, view weights, weighted concatenation and the
/// consensus embedding + k-means. Never forms an n x n matrix.
inline ClusteringResult run_mvsck(const MultiViewDataset& dataset, const PipelineConfig& config,
                                  const RunOptions& options = {}) {
    validate_config(config, dataset);
    const std::size_t views = dataset.num_views();
    std::vector<std::optional<ViewStage>> stages(views);
    std::vector<std::exception_ptr> failures(views);

    auto run_one = [&](std::size_t v) {
        try {
            stages[v] = run_view_stage(dataset.view(v).features.values(), config, v, options.deadline);
        } catch (...) {
            failures[v] = std::current_exception();
        }
    };
    if (config.parallel_views && views > 1) {
        std::vector<std::jthread> workers;
        workers.reserve(views);
        for (std::size_t v = 0; v < views; ++v) workers.emplace_back(run_one, v);
    } else {
        for (std::size_t v = 0; v < views; ++v) run_one(v);
    }
    for (std::size_t v = 0; v < views; ++v) {
        if (!failures[v]) continue;
        try {
            std::rethrow_exception(failures[v]);
        } catch (const Error& e) {
            throw Error(e.kind(), "view " + std::to_string(v) + ": " + e.what());
        } catch (const std::exception& e) {
            throw NumericError("view " + std::to_string(v) + ": " + e.what());
        }
    }

    ClusteringResult result;
    result.config = config;
    std::vector<double> traces(views);
    std::vector<FactorMatrix> factors;
    factors.reserve(views);
    for (std::size_t v = 0; v < views; ++v) {
        ViewStage& stage = *stages[v];
        for (const auto& [name, ms] : stage.timings) result.timings["view_" + name] += ms;
        result.nonpositive_degrees += stage.nonpositive_degrees;
        const FactorMatrix& trace_factor = stage.raw_factor ? *stage.raw_factor : stage.factor;
        traces[v] = clusterability_trace(trace_factor, stage.clustering.partition);
        result.per_view.push_back(std::move(stage.clustering.partition));
        factors.push_back(std::move(stage.factor));
        stages[v].reset();
    }

    {
        detail::StageClock clock(result.timings, "weights");
        result.weights = view_weights(traces, config.temperature, config.weight_mode);
    }
    check_deadline(options.deadline, "consensus");
    FactorMatrix consensus;
    {
        detail::StageClock clock(result.timings, "concat");
        std::vector<double> scales(views);
        for (std::size_t v = 0; v < views; ++v)
            scales[v] = config.concat_scale == ConcatScale::sqrt_lambda ? std::sqrt(result.weights.lambdas[v])
                                                                        : result.weights.lambdas[v];
        consensus = concatenate(factors, scales);
    }
    if (options.keep_view_factors) result.view_factors = std::move(factors);
    else factors.clear();
    {
        detail::StageClock clock(result.timings, "consensus_normalize");
        const Degrees degrees = implicit_degrees(consensus);
        result.nonpositive_degrees += degrees.nonpositive;
        consensus = degree_normalize(consensus, degrees.values);
    }
    SpectralEmbedding embedding;
    {
        detail::StageClock clock(result.timings, "consensus_embed");
        embedding = spectral_embedding(consensus, config.resolved_embedding_dim(), config.drop_first, config.svd,
                                       derive_seed(config.seed, detail::seed_consensus_embed), options.deadline);
    }
    {
        detail::StageClock clock(result.timings, "consensus_kmeans");
        KMeansResult km = kmeans(embedding.coords, config.k, derive_seed(config.seed, detail::seed_consensus_kmeans),
                                 {config.kmeans.max_iter, config.kmeans.tol, options.deadline});
        result.consensus = std::move(km.partition);
        result.consensus_inertia = km.inertia;
    }
    return result;
}

/// Dense reference for the consensus affinity: materializes sum_v lambda_v B_v B_v^T and the
/// Gram matrix of [sqrt(lambda_v) B_v]_v, checks they agree, and returns the summed form.
/// Test-sized inputs only.
inline DenseMatrix consensus_affinity_oracle(std::span<const FactorMatrix> factors, std::span<const double> lambdas) {
    require(!factors.empty(), "consensus_affinity_oracle: no factors");
    require(factors.size() == lambdas.size(), "consensus_affinity_oracle: one lambda per factor required");
    const Index n = factors.front().n();
    require(n <= 2048, "consensus_affinity_oracle: n=" + std::to_string(n) + " exceeds 2048");
    DenseMatrix summed = DenseMatrix::Zero(n, n);
    for (std::size_t v = 0; v < factors.size(); ++v) {
        require(factors[v].n() == n, "consensus_affinity_oracle: factors disagree on n");
        summed.noalias() += lambdas[v] * (factors[v].values * factors[v].values.transpose());
    }
    std::vector<double> scales(lambdas.size());
    for (std::size_t v = 0; v < lambdas.size(); ++v) scales[v] = std::sqrt(lambdas[v]);
    const FactorMatrix stacked = concatenate(factors, scales);
    const DenseMatrix gram = stacked.values * stacked.values.transpose();
    const double scale = std::max(1.0, summed.cwiseAbs().maxCoeff());
    if ((gram - summed).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw NumericError("consensus_affinity_oracle: concatenated Gram disagrees with weighted sum");
    return summed;
}

} // namespace mvsck
