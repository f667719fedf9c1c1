#pragma once

#include "mvsck/common.hpp"
#include "mvsck/factor_matrix.hpp"
#include "mvsck/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace mvsck {

enum class WeightMode {
    softmax,         ///< lambda_v proportional to exp(trace_v / T), as printed
    uniform,         ///< lambda_v = 1 / V
    negated_softmax, ///< lambda_v proportional to exp(-trace_v / T)
};

inline const char* to_string(WeightMode m) {
    switch (m) {
    case WeightMode::softmax: return "softmax";
    case WeightMode::uniform: return "uniform";
    case WeightMode::negated_softmax: return "negated";
    }
    return "?";
}

inline std::optional<WeightMode> parse_weight_mode(std::string_view s) {
    if (s == "softmax") return WeightMode::softmax;
    if (s == "uniform") return WeightMode::uniform;
    if (s == "negated") return WeightMode::negated_softmax;
    return std::nullopt;
}

struct ViewWeights {
    std::vector<double> lambdas;
    double temperature = 0.1;
    std::vector<double> raw_traces;
    WeightMode mode = WeightMode::softmax;
};

/// Tr(G^T (I - B B^T) G) = n - ||B^T G||_F^2 with G the indicator matrix of `partition`.
inline double clusterability_trace(const FactorMatrix& b, const Partition& partition) {
    require(b.n() == partition.n(), "clusterability_trace: factor has " + std::to_string(b.n()) + " rows, partition " +
                                        std::to_string(partition.n()) + " points");
    DenseMatrix projected = DenseMatrix::Zero(partition.k, b.m()); // (B^T G)^T
    for (Index i = 0; i < b.n(); ++i) {
        const int c = partition.labels[static_cast<std::size_t>(i)];
        require(c >= 0 && c < partition.k, "clusterability_trace: label out of range");
        projected.row(c) += b.values.row(i);
    }
    return static_cast<double>(b.n()) - projected.squaredNorm();
}

/// Max-shifted softmax of traces / T. Weights are kept strictly positive: an entry that
/// underflows is raised to the smallest normal double.
inline ViewWeights softmax_weights(std::span<const double> traces, double temperature) {
    if (!(temperature > 0.0)) throw ConfigError("temperature must be positive");
    require(!traces.empty(), "softmax_weights: no traces");
    ViewWeights w;
    w.temperature = temperature;
    w.raw_traces.assign(traces.begin(), traces.end());
    const double top = *std::max_element(traces.begin(), traces.end());
    w.lambdas.resize(traces.size());
    double total = 0.0;
    for (std::size_t v = 0; v < traces.size(); ++v) {
        w.lambdas[v] = std::exp((traces[v] - top) / temperature);
        total += w.lambdas[v];
    }
    for (double& l : w.lambdas) l = std::max(l / total, std::numeric_limits<double>::min());
    return w;
}

inline ViewWeights view_weights(std::span<const double> traces, double temperature, WeightMode mode) {
    if (mode == WeightMode::uniform) {
        if (!(temperature > 0.0)) throw ConfigError("temperature must be positive");
        require(!traces.empty(), "view_weights: no traces");
        ViewWeights w;
        w.temperature = temperature;
        w.raw_traces.assign(traces.begin(), traces.end());
        w.lambdas.assign(traces.size(), 1.0 / static_cast<double>(traces.size()));
        w.mode = mode;
        return w;
    }
    ViewWeights w;
    if (mode == WeightMode::negated_softmax) {
        std::vector<double> negated(traces.begin(), traces.end());
        for (double& t : negated) t = -t;
        w = softmax_weights(negated, temperature);
        w.raw_traces.assign(traces.begin(), traces.end());
    } else {
        w = softmax_weights(traces, temperature);
    }
    w.mode = mode;
    return w;
}

} // namespace mvsck
