#pragma once

#include "mvsck/common.hpp"

#include <Eigen/SparseCore>

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace mvsck {

enum class DataErrorCode {
    missing_file,
    malformed_header,
    malformed_body,
    index_out_of_range,
    size_mismatch,
    duplicate_edge,
    asymmetric_graph,
    non_finite,
    invalid_value,
};

inline const char* to_string(DataErrorCode code) {
    switch (code) {
    case DataErrorCode::missing_file: return "missing file";
    case DataErrorCode::malformed_header: return "malformed header";
    case DataErrorCode::malformed_body: return "malformed body";
    case DataErrorCode::index_out_of_range: return "index out of range";
    case DataErrorCode::size_mismatch: return "size mismatch";
    case DataErrorCode::duplicate_edge: return "duplicate edge";
    case DataErrorCode::asymmetric_graph: return "asymmetric graph";
    case DataErrorCode::non_finite: return "non-finite value";
    case DataErrorCode::invalid_value: return "invalid value";
    }
    return "data error";
}

/// Error raised while reading or validating a dataset. Always names the offending file
/// once it propagates out of the loader.
class DataError : public Error {
public:
    DataError(DataErrorCode code, std::string file, const std::string& detail)
        : Error(ErrorKind::data, compose(code, file, detail)), code_(code), file_(std::move(file)),
          detail_(detail) {}

    DataErrorCode code() const noexcept { return code_; }
    const std::string& file() const noexcept { return file_; }
    const std::string& detail() const noexcept { return detail_; }

    DataError with_file(const std::string& file) const { return {code_, file, detail_}; }

private:
    static std::string compose(DataErrorCode code, const std::string& file, const std::string& detail) {
        std::string msg = to_string(code);
        if (!file.empty()) msg += " in '" + file + "'";
        if (!detail.empty()) msg += ": " + detail;
        return msg;
    }

    DataErrorCode code_;
    std::string file_;
    std::string detail_;
};

struct Edge {
    Index row = 0;
    Index col = 0;
    double weight = 1.0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

/// Coordinate-list graph over n nodes. Edges are kept sorted by (row, col) without duplicates.
class SparseGraph {
public:
    SparseGraph() = default;

    /// Validates and canonicalizes an edge list. Duplicate (row, col) pairs are rejected.
    SparseGraph(Index n, std::vector<Edge> edges, bool symmetric) : n_(n), edges_(std::move(edges)), symmetric_(symmetric) {
        if (n_ < 0) throw DataError(DataErrorCode::invalid_value, "", "negative node count");
        for (const auto& e : edges_) {
            if (e.row < 0 || e.row >= n_ || e.col < 0 || e.col >= n_)
                throw DataError(DataErrorCode::index_out_of_range, "",
                                "edge (" + std::to_string(e.row) + ", " + std::to_string(e.col) +
                                    ") outside [0, " + std::to_string(n_) + ")");
            if (!std::isfinite(e.weight)) throw DataError(DataErrorCode::non_finite, "", "edge weight");
            if (e.weight < 0.0) throw DataError(DataErrorCode::invalid_value, "", "negative edge weight");
        }
        std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
            return std::tie(a.row, a.col) < std::tie(b.row, b.col);
        });
        for (std::size_t i = 1; i < edges_.size(); ++i) {
            if (edges_[i].row == edges_[i - 1].row && edges_[i].col == edges_[i - 1].col)
                throw DataError(DataErrorCode::duplicate_edge, "",
                                "(" + std::to_string(edges_[i].row) + ", " + std::to_string(edges_[i].col) + ")");
        }
        if (symmetric_) {
            for (const auto& e : edges_) {
                const Edge* mirror = find(e.col, e.row);
                if (mirror == nullptr || mirror->weight != e.weight)
                    throw DataError(DataErrorCode::asymmetric_graph, "",
                                    "edge (" + std::to_string(e.row) + ", " + std::to_string(e.col) +
                                        ") has no matching mirror");
            }
        }
    }

    /// Builds a graph from raw triplets: duplicates are merged keeping the largest weight,
    /// and with `symmetrize` every edge is mirrored before merging.
    static SparseGraph coalesce(Index n, std::vector<Edge> triplets, bool symmetrize) {
        if (symmetrize) {
            const std::size_t count = triplets.size();
            triplets.reserve(2 * count);
            for (std::size_t i = 0; i < count; ++i) {
                const Edge e = triplets[i];
                if (e.row != e.col) triplets.push_back({e.col, e.row, e.weight});
            }
        }
        std::sort(triplets.begin(), triplets.end(), [](const Edge& a, const Edge& b) {
            return std::tie(a.row, a.col, a.weight) < std::tie(b.row, b.col, b.weight);
        });
        std::vector<Edge> merged;
        merged.reserve(triplets.size());
        for (const auto& e : triplets) {
            if (!merged.empty() && merged.back().row == e.row && merged.back().col == e.col)
                merged.back().weight = std::max(merged.back().weight, e.weight);
            else
                merged.push_back(e);
        }
        return SparseGraph(n, std::move(merged), symmetrize);
    }

    Index n() const noexcept { return n_; }
    Index nnz() const noexcept { return static_cast<Index>(edges_.size()); }
    bool symmetric() const noexcept { return symmetric_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }

    const Edge* find(Index row, Index col) const {
        auto it = std::lower_bound(edges_.begin(), edges_.end(), std::pair{row, col},
                                   [](const Edge& e, const std::pair<Index, Index>& key) {
                                       return std::tie(e.row, e.col) < std::tie(key.first, key.second);
                                   });
        if (it != edges_.end() && it->row == row && it->col == col) return &*it;
        return nullptr;
    }

    Eigen::SparseMatrix<double, Eigen::RowMajor> to_sparse() const {
        std::vector<Eigen::Triplet<double>> triplets;
        triplets.reserve(edges_.size());
        for (const auto& e : edges_) triplets.emplace_back(e.row, e.col, e.weight);
        Eigen::SparseMatrix<double, Eigen::RowMajor> m(n_, n_);
        m.setFromTriplets(triplets.begin(), triplets.end());
        return m;
    }

    friend bool operator==(const SparseGraph&, const SparseGraph&) = default;

private:
    Index n_ = 0;
    std::vector<Edge> edges_;
    bool symmetric_ = false;
};

/// Dense n x d node features; every entry finite.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    explicit FeatureMatrix(DenseMatrix values) : values_(std::move(values)) {
        if (!values_.allFinite()) throw DataError(DataErrorCode::non_finite, "", "feature matrix");
    }

    Index n() const noexcept { return values_.rows(); }
    Index d() const noexcept { return values_.cols(); }
    const DenseMatrix& values() const noexcept { return values_; }

    friend bool operator==(const FeatureMatrix& a, const FeatureMatrix& b) {
        return a.values_.rows() == b.values_.rows() && a.values_.cols() == b.values_.cols() &&
               (a.values_.size() == 0 ||
                std::memcmp(a.values_.data(), b.values_.data(), sizeof(double) * a.values_.size()) == 0);
    }

private:
    DenseMatrix values_;
};

struct View {
    std::optional<SparseGraph> graph;
    FeatureMatrix features;
    int propagation_order = 0;
    /// For graphless views: index of the view whose graph drives propagation.
    std::optional<std::size_t> propagate_with;

    friend bool operator==(const View&, const View&) = default;
};

class MultiViewDataset {
public:
    MultiViewDataset() = default;
    MultiViewDataset(std::vector<View> views, std::optional<std::vector<int>> labels = std::nullopt)
        : views_(std::move(views)), labels_(std::move(labels)) {
        validate();
    }

    Index n() const noexcept { return views_.empty() ? 0 : views_.front().features.n(); }
    std::size_t num_views() const noexcept { return views_.size(); }
    const std::vector<View>& views() const noexcept { return views_; }
    const View& view(std::size_t v) const { return views_.at(v); }
    const std::optional<std::vector<int>>& labels() const noexcept { return labels_; }

    /// Graph used to propagate view v: its own, the explicitly designated one, or the
    /// first view that has a graph. Null when the dataset has no graph at all.
    const SparseGraph* propagation_graph(std::size_t v) const {
        const View& view = views_.at(v);
        if (view.graph) return &*view.graph;
        if (view.propagate_with) return &*views_.at(*view.propagate_with).graph;
        for (const auto& other : views_)
            if (other.graph) return &*other.graph;
        return nullptr;
    }

    friend bool operator==(const MultiViewDataset&, const MultiViewDataset&) = default;

private:
    void validate() const {
        if (views_.empty()) throw DataError(DataErrorCode::invalid_value, "", "dataset has no views");
        const Index n = views_.front().features.n();
        for (std::size_t v = 0; v < views_.size(); ++v) {
            const View& view = views_[v];
            if (view.features.n() != n)
                throw DataError(DataErrorCode::size_mismatch, "",
                                "view " + std::to_string(v) + " has " + std::to_string(view.features.n()) +
                                    " rows, expected " + std::to_string(n));
            if (view.graph && view.graph->n() != n)
                throw DataError(DataErrorCode::size_mismatch, "",
                                "view " + std::to_string(v) + " graph declares n=" + std::to_string(view.graph->n()) +
                                    " but features have " + std::to_string(n) + " rows");
            if (view.propagation_order < 0)
                throw DataError(DataErrorCode::invalid_value, "", "negative propagation order");
            if (view.propagate_with) {
                if (*view.propagate_with >= views_.size() || !views_[*view.propagate_with].graph)
                    throw DataError(DataErrorCode::invalid_value, "",
                                    "view " + std::to_string(v) + " propagates with a view that has no graph");
            }
        }
        if (labels_ && static_cast<Index>(labels_->size()) != n)
            throw DataError(DataErrorCode::size_mismatch, "",
                            "labels have " + std::to_string(labels_->size()) + " entries, expected " + std::to_string(n));
    }

    std::vector<View> views_;
    std::optional<std::vector<int>> labels_;
};

// ---------------------------------------------------------------------------------------------
// On-disk formats

namespace io {

inline std::string format_double(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, end);
}

inline std::ifstream open_input(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) throw DataError(DataErrorCode::missing_file, path.string(), "cannot open");
    return in;
}

inline std::ofstream open_output(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(path, mode | std::ios::trunc);
    if (!out) throw DataError(DataErrorCode::missing_file, path.string(), "cannot create");
    return out;
}

template <class T>
bool parse_number(std::string_view token, T& out) {
    const char* first = token.data();
    const char* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) tokens.push_back(line.substr(i, j - i));
        i = j;
    }
    return tokens;
}

inline SparseGraph read_graph(const std::filesystem::path& path) {
    auto in = open_input(path);
    const std::string file = path.string();
    std::string line;
    if (!std::getline(in, line)) throw DataError(DataErrorCode::malformed_header, file, "empty file");
    auto head = split_ws(line);
    Index n = 0, nnz = 0;
    int symmetric = 0;
    if (head.size() != 6 || head[0] != "n" || head[2] != "nnz" || head[4] != "symmetric" ||
        !parse_number(head[1], n) || !parse_number(head[3], nnz) || !parse_number(head[5], symmetric) ||
        n < 0 || nnz < 0 || (symmetric != 0 && symmetric != 1))
        throw DataError(DataErrorCode::malformed_header, file, "expected 'n <n> nnz <nnz> symmetric <0|1>'");

    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(nnz));
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        auto tok = split_ws(line);
        if (tok.empty()) continue;
        Edge e;
        if (tok.size() != 3 || !parse_number(tok[0], e.row) || !parse_number(tok[1], e.col) ||
            !parse_number(tok[2], e.weight))
            throw DataError(DataErrorCode::malformed_body, file, "line " + std::to_string(line_no));
        if (e.row < 0 || e.row >= n || e.col < 0 || e.col >= n)
            throw DataError(DataErrorCode::index_out_of_range, file,
                            "line " + std::to_string(line_no) + " references node outside [0, " + std::to_string(n) + ")");
        edges.push_back(e);
    }
    if (static_cast<Index>(edges.size()) != nnz)
        throw DataError(DataErrorCode::malformed_body, file,
                        "header declares " + std::to_string(nnz) + " edges, found " + std::to_string(edges.size()));
    try {
        return SparseGraph(n, std::move(edges), symmetric == 1);
    } catch (const DataError& err) {
        throw err.with_file(file);
    }
}

inline void write_graph(const SparseGraph& graph, const std::filesystem::path& path) {
    auto out = open_output(path);
    out << "n " << graph.n() << " nnz " << graph.nnz() << " symmetric " << (graph.symmetric() ? 1 : 0) << '\n';
    for (const auto& e : graph.edges()) out << e.row << ' ' << e.col << ' ' << format_double(e.weight) << '\n';
    if (!out) throw DataError(DataErrorCode::missing_file, path.string(), "write failed");
}

inline void byteswap_doubles(double* data, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
        unsigned char* b = reinterpret_cast<unsigned char*>(data + i);
        std::reverse(b, b + sizeof(double));
    }
}

inline FeatureMatrix read_features(const std::filesystem::path& path) {
    auto in = open_input(path, std::ios::in | std::ios::binary);
    const std::string file = path.string();
    std::string line;
    if (!std::getline(in, line)) throw DataError(DataErrorCode::malformed_header, file, "empty file");
    auto head = split_ws(line);
    Index n = 0, d = 0;
    if (head.size() != 6 || head[0] != "n" || head[2] != "d" || head[4] != "dtype" || head[5] != "f64" ||
        !parse_number(head[1], n) || !parse_number(head[3], d) || n < 0 || d < 0)
        throw DataError(DataErrorCode::malformed_header, file, "expected 'n <n> d <d> dtype f64'");

    DenseMatrix values(n, d);
    const auto bytes = static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(n * d));
    in.read(reinterpret_cast<char*>(values.data()), bytes);
    if (in.gcount() != bytes)
        throw DataError(DataErrorCode::malformed_body, file,
                        "expected " + std::to_string(bytes) + " payload bytes, found " + std::to_string(in.gcount()));
    if (in.peek() != std::ifstream::traits_type::eof())
        throw DataError(DataErrorCode::malformed_body, file, "trailing bytes after payload");
    if constexpr (std::endian::native == std::endian::big)
        byteswap_doubles(values.data(), static_cast<std::size_t>(values.size()));
    try {
        return FeatureMatrix(std::move(values));
    } catch (const DataError& err) {
        throw err.with_file(file);
    }
}

inline void write_features(const DenseMatrix& values, const std::filesystem::path& path) {
    auto out = open_output(path, std::ios::out | std::ios::binary);
    out << "n " << values.rows() << " d " << values.cols() << " dtype f64\n";
    if constexpr (std::endian::native == std::endian::big) {
        DenseMatrix copy = values;
        byteswap_doubles(copy.data(), static_cast<std::size_t>(copy.size()));
        out.write(reinterpret_cast<const char*>(copy.data()), static_cast<std::streamsize>(sizeof(double) * copy.size()));
    } else {
        out.write(reinterpret_cast<const char*>(values.data()),
                  static_cast<std::streamsize>(sizeof(double) * values.size()));
    }
    if (!out) throw DataError(DataErrorCode::missing_file, path.string(), "write failed");
}

inline void write_features(const FeatureMatrix& features, const std::filesystem::path& path) {
    write_features(features.values(), path);
}

inline std::vector<int> read_labels(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::vector<int> labels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto tok = split_ws(line);
        if (tok.empty()) continue;
        int value = 0;
        if (tok.size() != 1 || !parse_number(tok[0], value))
            throw DataError(DataErrorCode::malformed_body, path.string(), "line " + std::to_string(line_no));
        labels.push_back(value);
    }
    return labels;
}

inline void write_labels(std::span<const int> labels, const std::filesystem::path& path) {
    auto out = open_output(path);
    for (int label : labels) out << label << '\n';
    if (!out) throw DataError(DataErrorCode::missing_file, path.string(), "write failed");
}

inline constexpr const char* manifest_name = "manifest.txt";

} // namespace io

/// Reads a dataset directory: `manifest.txt` plus the graph, feature and label files it names.
///
/// Manifest lines:
///   view <idx> graph <file|none> features <file> p <int> [propagate_with <idx>]
///   labels <file>
/// Blank lines and lines starting with '#' are ignored. Paths are relative to the directory.
inline MultiViewDataset load_dataset(const std::filesystem::path& dir) {
    const auto manifest_path = dir / io::manifest_name;
    auto in = io::open_input(manifest_path);
    const std::string manifest = manifest_path.string();

    struct Entry {
        std::size_t index;
        std::string graph;
        std::string features;
        int p;
        std::optional<std::size_t> propagate_with;
    };
    std::vector<Entry> entries;
    std::optional<std::string> labels_file;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto tok = io::split_ws(line);
        if (tok.empty() || tok[0].front() == '#') continue;
        const std::string where = "line " + std::to_string(line_no);
        if (tok[0] == "labels") {
            if (tok.size() != 2) throw DataError(DataErrorCode::malformed_body, manifest, where);
            labels_file = std::string(tok[1]);
            continue;
        }
        Entry e{};
        if (tok[0] != "view" || (tok.size() != 8 && tok.size() != 10) || tok[2] != "graph" || tok[4] != "features" ||
            tok[6] != "p" || !io::parse_number(tok[1], e.index) || !io::parse_number(tok[7], e.p) || e.p < 0)
            throw DataError(DataErrorCode::malformed_body, manifest, where);
        e.graph = std::string(tok[3]);
        e.features = std::string(tok[5]);
        if (tok.size() == 10) {
            std::size_t other = 0;
            if (tok[8] != "propagate_with" || !io::parse_number(tok[9], other))
                throw DataError(DataErrorCode::malformed_body, manifest, where);
            e.propagate_with = other;
        }
        entries.push_back(std::move(e));
    }
    if (entries.empty()) throw DataError(DataErrorCode::malformed_body, manifest, "no views listed");
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.index < b.index; });
    for (std::size_t i = 0; i < entries.size(); ++i)
        if (entries[i].index != i)
            throw DataError(DataErrorCode::malformed_body, manifest, "view indices must be 0..V-1 without gaps");

    std::vector<View> views;
    std::optional<Index> n;
    std::string n_source;
    auto check_n = [&](Index rows, const std::string& file) {
        if (!n) {
            n = rows;
            n_source = file;
        } else if (*n != rows) {
            throw DataError(DataErrorCode::size_mismatch, file,
                            "declares n=" + std::to_string(rows) + " but '" + n_source + "' has n=" + std::to_string(*n));
        }
    };
    for (const auto& e : entries) {
        View view;
        const auto feature_path = dir / e.features;
        view.features = io::read_features(feature_path);
        check_n(view.features.n(), feature_path.string());
        if (e.graph != "none") {
            const auto graph_path = dir / e.graph;
            view.graph = io::read_graph(graph_path);
            check_n(view.graph->n(), graph_path.string());
        }
        view.propagation_order = e.p;
        view.propagate_with = e.propagate_with;
        views.push_back(std::move(view));
    }
    std::optional<std::vector<int>> labels;
    if (labels_file) {
        const auto labels_path = dir / *labels_file;
        labels = io::read_labels(labels_path);
        if (static_cast<Index>(labels->size()) != *n)
            throw DataError(DataErrorCode::size_mismatch, labels_path.string(),
                            std::to_string(labels->size()) + " labels for n=" + std::to_string(*n));
    }
    try {
        return MultiViewDataset(std::move(views), std::move(labels));
    } catch (const DataError& err) {
        throw err.with_file(manifest);
    }
}

/// Writes a dataset in the canonical directory layout; load_dataset reproduces it bit-exactly.
inline void save_dataset(const MultiViewDataset& dataset, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto manifest = io::open_output(dir / io::manifest_name);
    for (std::size_t v = 0; v < dataset.num_views(); ++v) {
        const View& view = dataset.view(v);
        const std::string features = "view" + std::to_string(v) + ".features.bin";
        std::string graph = "none";
        if (view.graph) {
            graph = "view" + std::to_string(v) + ".graph.txt";
            io::write_graph(*view.graph, dir / graph);
        }
        io::write_features(view.features, dir / features);
        manifest << "view " << v << " graph " << graph << " features " << features << " p " << view.propagation_order;
        if (view.propagate_with) manifest << " propagate_with " << *view.propagate_with;
        manifest << '\n';
    }
    if (dataset.labels()) {
        io::write_labels(*dataset.labels(), dir / "labels.txt");
        manifest << "labels labels.txt\n";
    }
    if (!manifest) throw DataError(DataErrorCode::missing_file, (dir / io::manifest_name).string(), "write failed");
}

// ---------------------------------------------------------------------------------------------
// k-NN graph construction

/// Returns the `k` nearest other rows of `row`. Plug an approximate index in here for
/// n above ~50k; the default is exact brute force.
using NeighborSearch = std::function<std::vector<Index>(const FeatureMatrix&, Index row, Index k)>;

/// Exact Euclidean k-NN of one row; ties resolved towards the lowest index.
inline std::vector<Index> brute_force_neighbors(const FeatureMatrix& features, Index row, Index k) {
    const DenseMatrix& x = features.values();
    const Index n = x.rows();
    std::vector<std::pair<double, Index>> dist;
    dist.reserve(static_cast<std::size_t>(n - 1));
    for (Index j = 0; j < n; ++j) {
        if (j == row) continue;
        dist.emplace_back((x.row(row) - x.row(j)).squaredNorm(), j);
    }
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    std::vector<Index> out(static_cast<std::size_t>(k));
    for (Index i = 0; i < k; ++i) out[static_cast<std::size_t>(i)] = dist[static_cast<std::size_t>(i)].second;
    return out;
}

/// Unit-weight k-NN graph, symmetrized by union; `self_loops` adds (i, i, 1) on every node.
inline SparseGraph build_knn_graph(const FeatureMatrix& features, Index k_neighbors, bool self_loops,
                                   const NeighborSearch& search = {}) {
    const Index n = features.n();
    require(k_neighbors >= 1, "k_neighbors must be positive");
    require(k_neighbors < n, "k_neighbors (" + std::to_string(k_neighbors) + ") must be smaller than n (" +
                                 std::to_string(n) + ")");
    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(n * (2 * k_neighbors + 1)));
    for (Index i = 0; i < n; ++i) {
        const auto neighbors = search ? search(features, i, k_neighbors) : brute_force_neighbors(features, i, k_neighbors);
        for (Index j : neighbors) {
            edges.push_back({i, j, 1.0});
            edges.push_back({j, i, 1.0});
        }
        if (self_loops) edges.push_back({i, i, 1.0});
    }
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
        return std::tie(a.row, a.col) < std::tie(b.row, b.col);
    });
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return SparseGraph(n, std::move(edges), true);
}

// ---------------------------------------------------------------------------------------------
// Synthetic multi-view generator

struct SynthOptions {
    Index n = 300;
    int k = 3;
    int views = 2;
    double noise = 0.1;
    std::uint64_t seed = 0;
    Index feature_dim = 32;
    /// The last `pure_noise_views` views carry features and graphs unrelated to the labels.
    int pure_noise_views = 0;
    bool with_graphs = true;
    int intra_degree = 8;
    int inter_degree = 1;
    int propagation_order = 2;
};

/// Gaussian blobs around k latent centroids, linearly embedded per view, plus a block graph
/// per view aligned with the same partition: a ring lattice inside each cluster and random
/// matchings between clusters, so degrees are (nearly) uniform. Labels are i mod k (balanced).
inline MultiViewDataset synth_multiview(const SynthOptions& opt) {
    require(opt.k >= 2 && opt.n >= opt.k, "synth_multiview needs n >= k >= 2");
    require(opt.views >= 1, "synth_multiview needs at least one view");
    require(opt.noise >= 0.0, "noise must be nonnegative");
    require(opt.feature_dim >= 1, "feature_dim must be positive");
    require(opt.pure_noise_views >= 0 && opt.pure_noise_views <= opt.views, "invalid pure_noise_views");

    const Index n = opt.n;
    const int k = opt.k;
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = static_cast<int>(i % k);

    std::vector<std::vector<Index>> members(static_cast<std::size_t>(k));
    for (Index i = 0; i < n; ++i) members[static_cast<std::size_t>(i % k)].push_back(i);

    const Index latent = k;
    std::mt19937_64 centroid_rng(derive_seed(opt.seed, 1));
    std::normal_distribution<double> normal(0.0, 1.0);
    DenseMatrix centroids(k, latent);
    for (Index i = 0; i < centroids.size(); ++i) centroids.data()[i] = normal(centroid_rng);

    std::vector<View> views;
    for (int v = 0; v < opt.views; ++v) {
        const bool pure_noise = v >= opt.views - opt.pure_noise_views;
        std::mt19937_64 rng(derive_seed(opt.seed, 2, static_cast<std::uint64_t>(v)));
        const Index d = opt.feature_dim;
        DenseMatrix x(n, d);
        if (pure_noise) {
            for (Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
        } else {
            DenseMatrix projection(latent, d);
            const double scale = 1.0 / std::sqrt(static_cast<double>(latent));
            for (Index i = 0; i < projection.size(); ++i) projection.data()[i] = scale * normal(rng);
            const DenseMatrix centers = centroids * projection;
            for (Index i = 0; i < n; ++i) {
                x.row(i) = centers.row(labels[static_cast<std::size_t>(i)]);
                if (opt.noise > 0.0)
                    for (Index j = 0; j < d; ++j) x(i, j) += opt.noise * normal(rng);
            }
        }

        View view;
        view.features = FeatureMatrix(std::move(x));
        view.propagation_order = opt.with_graphs ? opt.propagation_order : 0;
        if (opt.with_graphs) {
            std::vector<Edge> edges;
            auto add = [&](Index a, Index b) {
                if (a == b) return;
                edges.push_back({a, b, 1.0});
                edges.push_back({b, a, 1.0});
            };
            // Ring lattice over a shuffled node list: every node gets 2 * half neighbors.
            auto lattice = [&](std::vector<Index> nodes, int half) {
                std::shuffle(nodes.begin(), nodes.end(), rng);
                const auto size = static_cast<std::ptrdiff_t>(nodes.size());
                for (std::ptrdiff_t t = 0; t < size; ++t)
                    for (int o = 1; o <= half && o < size; ++o)
                        add(nodes[static_cast<std::size_t>(t)], nodes[static_cast<std::size_t>((t + o) % size)]);
            };
            if (pure_noise) {
                std::vector<Index> all(static_cast<std::size_t>(n));
                std::iota(all.begin(), all.end(), Index{0});
                lattice(all, (opt.intra_degree + opt.inter_degree + 1) / 2);
            } else {
                for (const auto& own : members) lattice(own, (opt.intra_degree + 1) / 2);
                // Random matchings between consecutive blocks for the cross-cluster edges.
                const int pairs = k == 2 ? 1 : k;
                for (int c = 0; c < pairs; ++c)
                    for (int t = 0; t < opt.inter_degree; ++t) {
                        auto a = members[static_cast<std::size_t>(c)];
                        auto b = members[static_cast<std::size_t>((c + 1) % k)];
                        std::shuffle(a.begin(), a.end(), rng);
                        std::shuffle(b.begin(), b.end(), rng);
                        for (std::size_t i = 0; i < std::max(a.size(), b.size()); ++i)
                            add(a[i % a.size()], b[i % b.size()]);
                    }
            }
            std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
                return std::tie(a.row, a.col) < std::tie(b.row, b.col);
            });
            edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
            view.graph = SparseGraph(n, std::move(edges), true);
        }
        views.push_back(std::move(view));
    }
    return MultiViewDataset(std::move(views), std::move(labels));
}

inline MultiViewDataset synth_multiview(Index n, int k, int views, double noise, std::uint64_t seed) {
    SynthOptions opt;
    opt.n = n;
    opt.k = k;
    opt.views = views;
    opt.noise = noise;
    opt.seed = seed;
    return synth_multiview(opt);
}

} // namespace mvsck
