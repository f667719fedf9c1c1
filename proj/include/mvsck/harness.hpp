#pragma once

// Experiment harness behind the `mvsck` command-line tool: dataset preparation, seeded
// campaigns with per-run JSON and an aggregate table, scaling benchmarks and evaluation.

#include "mvsck/data_model.hpp"
#include "mvsck/graph_prep.hpp"
#include "mvsck/metrics.hpp"
#include "mvsck/pipeline.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace mvsck::harness {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------------------------
// Configuration

inline json to_json(const PipelineConfig& c) {
    json j;
    j["f"] = c.resolved_f();
    j["k"] = c.k;
    j["temperature"] = c.temperature;
    j["kernel"] = to_string(c.kernel.kind);
    j["kernel_components"] = c.kernel.kind == KernelKind::quadratic_exact ? quadratic_output_dim(c.resolved_f())
                                                                         : c.resolved_components();
    if (c.kernel.params.gamma) j["gamma"] = *c.kernel.params.gamma;
    else j["gamma"] = nullptr;
    j["coef0"] = c.kernel.params.coef0;
    j["svd_method"] = c.svd.method == SvdMethod::exact        ? "exact"
                      : c.svd.method == SvdMethod::randomized ? "randomized"
                                                              : "auto";
    j["oversample"] = c.svd.oversample;
    j["power_iters"] = c.svd.power_iters;
    j["max_iter"] = c.kmeans.max_iter;
    j["tol"] = c.kmeans.tol;
    j["weight_mode"] = to_string(c.weight_mode);
    j["concat_scale"] = to_string(c.concat_scale);
    j["trace_affinity"] = c.trace_affinity == TraceAffinity::normalized ? "normalized" : "unnormalized";
    j["embedding_dim"] = c.resolved_embedding_dim();
    j["drop_first"] = c.drop_first;
    return j;
}

template <class T>
T json_get(const json& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

/// Overlays the keys present in `j` onto `c`. Unknown keys are rejected.
inline void apply_json(PipelineConfig& c, const json& j) {
    static const char* known[] = {"f",          "k",          "temperature", "kernel",       "kernel_components",
                                  "gamma",      "coef0",      "svd_method",  "oversample",   "power_iters",
                                  "max_iter",   "tol",        "weight_mode", "concat_scale", "trace_affinity",
                                  "embedding_dim", "drop_first", "seeds",    "runs",         "p",
                                  "time_limit", "normalization", "parallel_runs"};
    for (const auto& item : j.items())
        if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return item.key() == k; }) ==
            std::end(known))
            throw ConfigError("unknown config key '" + item.key() + "'");
    if (j.contains("f")) c.f = json_get<Index>(j, "f");
    if (j.contains("k")) c.k = json_get<int>(j, "k");
    if (j.contains("temperature")) c.temperature = json_get<double>(j, "temperature");
    if (j.contains("kernel")) {
        const auto kind = parse_kernel_kind(json_get<std::string>(j, "kernel"));
        if (!kind) throw ConfigError("unknown kernel '" + json_get<std::string>(j, "kernel") + "'");
        c.kernel.kind = *kind;
    }
    if (j.contains("kernel_components")) c.kernel.components = json_get<Index>(j, "kernel_components");
    if (j.contains("gamma") && !j.at("gamma").is_null()) c.kernel.params.gamma = json_get<double>(j, "gamma");
    if (j.contains("coef0")) c.kernel.params.coef0 = json_get<double>(j, "coef0");
    if (j.contains("svd_method")) {
        const auto m = json_get<std::string>(j, "svd_method");
        if (m == "auto") c.svd.method = SvdMethod::automatic;
        else if (m == "exact") c.svd.method = SvdMethod::exact;
        else if (m == "randomized") c.svd.method = SvdMethod::randomized;
        else throw ConfigError("unknown svd_method '" + m + "'");
    }
    if (j.contains("oversample")) c.svd.oversample = json_get<Index>(j, "oversample");
    if (j.contains("power_iters")) c.svd.power_iters = json_get<int>(j, "power_iters");
    if (j.contains("max_iter")) c.kmeans.max_iter = json_get<int>(j, "max_iter");
    if (j.contains("tol")) c.kmeans.tol = json_get<double>(j, "tol");
    if (j.contains("weight_mode")) {
        const auto m = parse_weight_mode(json_get<std::string>(j, "weight_mode"));
        if (!m) throw ConfigError("unknown weight_mode");
        c.weight_mode = *m;
    }
    if (j.contains("concat_scale")) {
        const auto s = parse_concat_scale(json_get<std::string>(j, "concat_scale"));
        if (!s) throw ConfigError("unknown concat_scale");
        c.concat_scale = *s;
    }
    if (j.contains("trace_affinity")) {
        const auto t = json_get<std::string>(j, "trace_affinity");
        if (t == "normalized") c.trace_affinity = TraceAffinity::normalized;
        else if (t == "unnormalized") c.trace_affinity = TraceAffinity::unnormalized;
        else throw ConfigError("unknown trace_affinity '" + t + "'");
    }
    if (j.contains("embedding_dim")) c.embedding_dim = json_get<Index>(j, "embedding_dim");
    if (j.contains("drop_first")) c.drop_first = json_get<bool>(j, "drop_first");
}

inline std::string config_hash(const PipelineConfig& c) {
    Fnv1a h;
    h.update(to_json(c).dump());
    return h.hex();
}

/// Parses "0:2,1:20" into {view -> propagation order}.
inline std::map<std::size_t, int> parse_propagation_orders(const std::string& text) {
    std::map<std::size_t, int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const auto colon = item.find(':');
        std::size_t view = 0;
        int order = 0;
        if (colon == std::string::npos || !io::parse_number(std::string_view(item).substr(0, colon), view) ||
            !io::parse_number(std::string_view(item).substr(colon + 1), order) || order < 0)
            throw ConfigError("invalid propagation order '" + item + "', expected <view>:<order>");
        out[view] = order;
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// run

struct ExperimentSpec {
    fs::path dataset;
    PipelineConfig config;
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
    std::map<std::size_t, int> propagation_orders;
    Normalization normalization = Normalization::sym_selfloop;
    fs::path output = "results";
    std::optional<fs::path> cache_dir;
    std::optional<double> time_limit;
    bool parallel_runs = false;
};

/// Reads a JSON config file onto an experiment spec (pipeline keys plus seeds, runs, p,
/// time_limit, normalization, parallel_runs).
inline void apply_config_file(ExperimentSpec& spec, const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config file '" + path.string() + "': " + e.what());
    }
    apply_json(spec.config, j);
    if (j.contains("seeds")) spec.seeds = json_get<std::vector<std::uint64_t>>(j, "seeds");
    if (j.contains("runs")) {
        const int runs = json_get<int>(j, "runs");
        if (runs < 1) throw ConfigError("runs must be at least 1");
        spec.seeds.resize(static_cast<std::size_t>(runs));
        for (int i = 0; i < runs; ++i) spec.seeds[static_cast<std::size_t>(i)] = static_cast<std::uint64_t>(i);
    }
    if (j.contains("p")) {
        for (const auto& item : j.at("p").items()) {
            std::size_t view = 0;
            if (!io::parse_number(std::string_view(item.key()), view)) throw ConfigError("invalid view index in 'p'");
            spec.propagation_orders[view] = item.value().get<int>();
        }
    }
    if (j.contains("time_limit")) spec.time_limit = json_get<double>(j, "time_limit");
    if (j.contains("normalization")) {
        const auto n = parse_normalization(json_get<std::string>(j, "normalization"));
        if (!n) throw ConfigError("unknown normalization");
        spec.normalization = *n;
    }
    if (j.contains("parallel_runs")) spec.parallel_runs = json_get<bool>(j, "parallel_runs");
}

enum class RunStatus { ok, timeout, error };

inline const char* to_string(RunStatus s) {
    switch (s) {
    case RunStatus::ok: return "ok";
    case RunStatus::timeout: return "timeout";
    case RunStatus::error: return "error";
    }
    return "?";
}

struct RunRecord {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    RunStatus status = RunStatus::ok;
    int exit_code = 0;
    std::string message;
    std::optional<Evaluation> metrics;
    double seconds = 0.0;
    json document;
};

struct CampaignSummary {
    int exit_code = 0;
    std::vector<RunRecord> runs;
    double prep_seconds = 0.0;
    json aggregate;
};

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};

/// Arithmetic mean and population standard deviation.
inline MeanStd mean_std(const std::vector<double>& values) {
    MeanStd out;
    if (values.empty()) return out;
    double sum = 0.0;
    for (double v : values) sum += v;
    out.mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(values.size()));
    return out;
}

inline void write_json(const json& j, const fs::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError(DataErrorCode::missing_file, path.string(), "cannot create");
    out << j.dump(2) << '\n';
}

inline MultiViewDataset with_propagation_orders(const MultiViewDataset& dataset,
                                                const std::map<std::size_t, int>& orders) {
    if (orders.empty()) return dataset;
    std::vector<View> views = dataset.views();
    for (const auto& [v, p] : orders) {
        if (v >= views.size())
            throw ConfigError("--p names view " + std::to_string(v) + " but dataset has " + std::to_string(views.size()));
        views[v].propagation_order = p;
    }
    return MultiViewDataset(std::move(views), dataset.labels());
}

inline RunRecord execute_run(const MultiViewDataset& dataset, const ExperimentSpec& spec, std::size_t index) {
    RunRecord rec;
    rec.index = index;
    rec.seed = spec.seeds[index];
    PipelineConfig config = spec.config;
    config.seed = rec.seed;

    json doc;
    doc["run"] = index;
    doc["seed"] = rec.seed;
    const std::string labels_name = "run_" + std::to_string(index) + ".labels.txt";
    const auto start = std::chrono::steady_clock::now();
    try {
        const Deadline deadline = spec.time_limit ? Deadline(std::chrono::duration<double>(*spec.time_limit)) : Deadline();
        ClusteringResult result = run_mvsck(dataset, config, {&deadline, false});
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        // A run that finished after the limit without hitting a checkpoint still times out.
        if (spec.time_limit && rec.seconds > *spec.time_limit) throw TimeoutError("time limit exceeded");
        io::write_labels(result.consensus.labels, spec.output / labels_name);
        doc["status"] = "ok";
        doc["labels_path"] = labels_name;
        doc["weights"] = result.weights.lambdas;
        doc["traces"] = result.weights.raw_traces;
        doc["stage_ms"] = result.timings;
        doc["seconds"] = rec.seconds;
        doc["nonpositive_degrees"] = result.nonpositive_degrees;
        if (dataset.labels()) {
            rec.metrics = evaluate(result.consensus.labels, *dataset.labels());
            doc["metrics"] = {{"ca", rec.metrics->ca}, {"cf1", rec.metrics->cf1}, {"nmi", rec.metrics->nmi},
                              {"ari", rec.metrics->ari}};
            json per_view = json::array();
            for (const auto& p : result.per_view) {
                const auto e = evaluate(p.labels, *dataset.labels());
                per_view.push_back({{"ca", e.ca}, {"cf1", e.cf1}, {"nmi", e.nmi}, {"ari", e.ari}});
            }
            doc["per_view_metrics"] = per_view;
        }
    } catch (const Error& e) {
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        rec.status = e.kind() == ErrorKind::timeout ? RunStatus::timeout : RunStatus::error;
        rec.exit_code = exit_code(e.kind());
        rec.message = e.what();
        doc["status"] = to_string(rec.status);
        doc["error"] = rec.message;
        doc["seconds"] = rec.seconds;
    } catch (const std::exception& e) {
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        rec.status = RunStatus::error;
        rec.exit_code = exit_code(ErrorKind::numeric);
        rec.message = e.what();
        doc["status"] = "error";
        doc["error"] = rec.message;
        doc["seconds"] = rec.seconds;
    }
    doc["config"] = to_json(config);
    doc["config_hash"] = config_hash(spec.config);
    rec.document = doc;
    write_json(doc, spec.output / ("run_" + std::to_string(index) + ".json"));
    return rec;
}

inline std::string percent_cell(const MeanStd& ms) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << 100.0 * ms.mean << " ±" << std::setprecision(1) << 100.0 * ms.std;
    return s.str();
}

/// Builds aggregate.json / aggregate.csv / aggregate.md from the run records.
inline json write_aggregate(const std::vector<RunRecord>& runs, const fs::path& output) {
    json agg;
    agg["runs"] = runs.size();
    std::vector<double> ca, cf1, nm, ar, secs;
    std::size_t ok = 0, timeouts = 0, errors = 0;
    for (const auto& r : runs) {
        if (r.status == RunStatus::ok) {
            ++ok;
            secs.push_back(r.seconds);
            if (r.metrics) {
                ca.push_back(r.metrics->ca);
                cf1.push_back(r.metrics->cf1);
                nm.push_back(r.metrics->nmi);
                ar.push_back(r.metrics->ari);
            }
        } else if (r.status == RunStatus::timeout) {
            ++timeouts;
        } else {
            ++errors;
        }
    }
    agg["ok"] = ok;
    agg["timeouts"] = timeouts;
    agg["errors"] = errors;
    auto put = [&](const char* key, const std::vector<double>& values) {
        if (values.empty()) {
            agg[key] = nullptr;
            return;
        }
        const auto ms = mean_std(values);
        agg[key] = {{"mean", ms.mean}, {"std", ms.std}};
    };
    put("ca", ca);
    put("cf1", cf1);
    put("nmi", nm);
    put("ari", ar);
    put("seconds", secs);
    write_json(agg, output / "aggregate.json");

    std::ofstream csv(output / "aggregate.csv", std::ios::trunc);
    csv << std::setprecision(17);
    csv << "run,seed,status,ca,cf1,nmi,ari,seconds\n";
    for (const auto& r : runs) {
        csv << r.index << ',' << r.seed << ',' << to_string(r.status) << ',';
        if (r.metrics)
            csv << r.metrics->ca << ',' << r.metrics->cf1 << ',' << r.metrics->nmi << ',' << r.metrics->ari << ',';
        else
            csv << ",,,,";
        csv << r.seconds << '\n';
    }
    auto cell = [&](const char* key) -> std::string {
        if (agg[key].is_null()) return "";
        std::ostringstream s;
        s << std::setprecision(17) << agg[key]["mean"].get<double>() << "±" << agg[key]["std"].get<double>();
        return s.str();
    };
    csv << "mean±std,,," << cell("ca") << ',' << cell("cf1") << ',' << cell("nmi") << ',' << cell("ari") << ','
        << cell("seconds") << '\n';

    std::ofstream md(output / "aggregate.md", std::ios::trunc);
    md << "| CA | CF1 | NMI | ARI | Time (s) |\n|---|---|---|---|---|\n";
    if (ok == 0 && timeouts > 0) {
        md << "| Timeout | Timeout | Timeout | Timeout | Timeout |\n";
    } else {
        auto pc = [&](const std::vector<double>& v) { return v.empty() ? std::string("N/A") : percent_cell(mean_std(v)); };
        std::ostringstream time;
        if (!secs.empty()) {
            const auto t = mean_std(secs);
            time << std::fixed << std::setprecision(2) << t.mean << " ±" << std::setprecision(1) << t.std;
        } else {
            time << "N/A";
        }
        md << "| " << pc(ca) << " | " << pc(cf1) << " | " << pc(nm) << " | " << pc(ar) << " | " << time.str() << " |\n";
    }
    return agg;
}

/// Executes every seeded run of a campaign. Dataset-level failures surface as exceptions;
/// per-run failures are recorded and reflected in the exit code.
inline CampaignSummary cmd_run(const ExperimentSpec& spec) {
    if (spec.seeds.empty()) throw ConfigError("at least one run is required");
    if (spec.time_limit && !(*spec.time_limit > 0.0)) throw ConfigError("time limit must be positive");
    CampaignSummary summary;
    const MultiViewDataset raw = with_propagation_orders(load_dataset(spec.dataset), spec.propagation_orders);
    validate_config(spec.config, raw);
    fs::create_directories(spec.output);

    const auto prep_start = std::chrono::steady_clock::now();
    const fs::path cache = spec.cache_dir.value_or(spec.output / "cache");
    const MultiViewDataset dataset = propagate_dataset(raw, spec.normalization, cache);
    summary.prep_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - prep_start).count();

    summary.runs.resize(spec.seeds.size());
    if (spec.parallel_runs) {
        std::vector<std::future<RunRecord>> futures;
        for (std::size_t i = 0; i < spec.seeds.size(); ++i)
            futures.push_back(std::async(std::launch::async, [&, i] { return execute_run(dataset, spec, i); }));
        for (std::size_t i = 0; i < futures.size(); ++i) summary.runs[i] = futures[i].get();
    } else {
        for (std::size_t i = 0; i < spec.seeds.size(); ++i) summary.runs[i] = execute_run(dataset, spec, i);
    }
    summary.aggregate = write_aggregate(summary.runs, spec.output);
    summary.aggregate["prep_seconds"] = summary.prep_seconds;

    bool any_timeout = false;
    for (const auto& r : summary.runs) {
        if (r.status == RunStatus::error && summary.exit_code == 0) summary.exit_code = r.exit_code;
        any_timeout = any_timeout || r.status == RunStatus::timeout;
    }
    if (summary.exit_code == 0 && any_timeout) summary.exit_code = exit_code(ErrorKind::timeout);
    return summary;
}

// ---------------------------------------------------------------------------------------------
// prepare

struct PrepareView {
    fs::path features;
    std::optional<fs::path> graph;
    int p = 0;
};

struct PrepareSpec {
    std::vector<PrepareView> views;
    std::optional<fs::path> labels;
    std::optional<Index> add_knn;
    bool self_loops = false;
    std::size_t knn_source = 0;
    std::optional<int> knn_p;
    bool symmetrize = true;
    std::optional<SynthOptions> synth;
    fs::path output;
    bool force = false;
};

inline bool has_canonical_header(const fs::path& path, std::string_view first_token, std::string_view marker) {
    std::ifstream in(path, std::ios::binary);
    std::string line;
    if (!in || !std::getline(in, line)) return false;
    const auto tok = io::split_ws(line);
    return !tok.empty() && tok[0] == first_token && line.find(marker) != std::string::npos;
}

/// Canonical binary features, or a text matrix with one row per line (whitespace or comma
/// separated; '#' comments).
inline FeatureMatrix read_external_features(const fs::path& path) {
    if (has_canonical_header(path, "n", "dtype f64")) return io::read_features(path);
    auto in = io::open_input(path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        const auto tok = io::split_ws(line);
        if (tok.empty()) continue;
        std::vector<double> row(tok.size());
        for (std::size_t j = 0; j < tok.size(); ++j)
            if (!io::parse_number(tok[j], row[j]))
                throw DataError(DataErrorCode::malformed_body, path.string(), "line " + std::to_string(line_no));
        if (!rows.empty() && row.size() != rows.front().size())
            throw DataError(DataErrorCode::malformed_body, path.string(),
                            "line " + std::to_string(line_no) + " has " + std::to_string(row.size()) + " columns, expected " +
                                std::to_string(rows.front().size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError(DataErrorCode::malformed_body, path.string(), "no rows");
    DenseMatrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    try {
        return FeatureMatrix(std::move(m));
    } catch (const DataError& e) {
        throw e.with_file(path.string());
    }
}

/// Canonical graph file, or an edge list "i j [w]" per line ('#'/'%' comments) over n nodes.
inline SparseGraph read_external_graph(const fs::path& path, Index n, bool symmetrize) {
    if (has_canonical_header(path, "n", "nnz")) return io::read_graph(path);
    auto in = io::open_input(path);
    std::vector<Edge> edges;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#' || line[0] == '%') continue;
        const auto tok = io::split_ws(line);
        if (tok.empty()) continue;
        Edge e;
        if ((tok.size() != 2 && tok.size() != 3) || !io::parse_number(tok[0], e.row) || !io::parse_number(tok[1], e.col) ||
            (tok.size() == 3 && !io::parse_number(tok[2], e.weight)))
            throw DataError(DataErrorCode::malformed_body, path.string(), "line " + std::to_string(line_no));
        if (e.row < 0 || e.row >= n || e.col < 0 || e.col >= n)
            throw DataError(DataErrorCode::size_mismatch, path.string(),
                            "line " + std::to_string(line_no) + " references node outside the " + std::to_string(n) +
                                " feature rows");
        edges.push_back(e);
    }
    try {
        return SparseGraph::coalesce(n, std::move(edges), symmetrize);
    } catch (const DataError& e) {
        throw e.with_file(path.string());
    }
}

/// Builds a canonical dataset directory from external inputs or the synthetic generator,
/// optionally appending a k-NN graph view over an existing view's features.
inline MultiViewDataset cmd_prepare(const PrepareSpec& spec) {
    if (fs::exists(spec.output / io::manifest_name) && !spec.force)
        throw ConfigError("output '" + spec.output.string() + "' already holds a dataset (use --force)");
    std::vector<View> views;
    std::optional<std::vector<int>> labels;
    if (spec.synth) {
        if (!spec.views.empty()) throw ConfigError("--synth cannot be combined with --view");
        MultiViewDataset synth = synth_multiview(*spec.synth);
        views = synth.views();
        labels = synth.labels();
    } else {
        if (spec.views.empty()) throw ConfigError("at least one --view is required");
        std::string first_file;
        for (const auto& input : spec.views) {
            View view;
            view.features = read_external_features(input.features);
            if (!views.empty() && view.features.n() != views.front().features.n())
                throw DataError(DataErrorCode::size_mismatch, input.features.string(),
                                std::to_string(view.features.n()) + " rows but '" + first_file + "' has " +
                                    std::to_string(views.front().features.n()));
            if (views.empty()) first_file = input.features.string();
            if (input.graph) {
                view.graph = read_external_graph(*input.graph, view.features.n(), spec.symmetrize);
                if (view.graph->n() != view.features.n())
                    throw DataError(DataErrorCode::size_mismatch, input.graph->string(),
                                    "graph declares n=" + std::to_string(view.graph->n()) + " but '" +
                                        input.features.string() + "' has " + std::to_string(view.features.n()) + " rows");
            }
            if (input.p < 0) throw ConfigError("propagation order must be nonnegative");
            view.propagation_order = input.p;
            views.push_back(std::move(view));
        }
        if (spec.labels) {
            labels = io::read_labels(*spec.labels);
            if (static_cast<Index>(labels->size()) != views.front().features.n())
                throw DataError(DataErrorCode::size_mismatch, spec.labels->string(),
                                std::to_string(labels->size()) + " labels but '" + first_file + "' has " +
                                    std::to_string(views.front().features.n()) + " rows");
        }
    }
    if (spec.add_knn) {
        if (spec.knn_source >= views.size()) throw ConfigError("--knn-from names a missing view");
        View knn;
        knn.features = views[spec.knn_source].features;
        knn.graph = build_knn_graph(knn.features, *spec.add_knn, spec.self_loops);
        knn.propagation_order = spec.knn_p.value_or(views[spec.knn_source].propagation_order);
        views.push_back(std::move(knn));
    }
    MultiViewDataset dataset(std::move(views), std::move(labels));
    save_dataset(dataset, spec.output);
    return dataset;
}

// ---------------------------------------------------------------------------------------------
// bench

struct BenchSpec {
    std::vector<Index> sizes{10000, 20000, 40000};
    int k = 10;
    Index f = 10;
    int views = 2;
    Index feature_dim = 64;
    double noise = 0.1;
    int repeats = 3;
    std::uint64_t seed = 0;
    PipelineConfig config;
    std::optional<fs::path> output;
};

struct BenchRow {
    Index n = 0;
    double median_seconds = 0.0;
    double ari = 0.0;
};

/// Times run_mvsck on synthetic data of growing size (propagation excluded) and reports the
/// median wall time per size.
inline std::vector<BenchRow> cmd_bench(const BenchSpec& spec, std::ostream& log) {
    std::vector<BenchRow> rows;
    for (Index n : spec.sizes) {
        SynthOptions opt;
        opt.n = n;
        opt.k = spec.k;
        opt.views = spec.views;
        opt.noise = spec.noise;
        opt.seed = spec.seed;
        opt.feature_dim = spec.feature_dim;
        opt.with_graphs = false;
        const MultiViewDataset data = synth_multiview(opt);
        PipelineConfig config = spec.config;
        config.k = spec.k;
        config.f = spec.f;
        config.seed = spec.seed;
        std::vector<double> times;
        BenchRow row;
        row.n = n;
        for (int r = 0; r < spec.repeats; ++r) {
            const auto start = std::chrono::steady_clock::now();
            const auto result = run_mvsck(data, config);
            times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
            row.ari = ari(result.consensus.labels, *data.labels()).value;
        }
        std::sort(times.begin(), times.end());
        row.median_seconds = times[times.size() / 2];
        rows.push_back(row);
        log << "n=" << n << " median_seconds=" << row.median_seconds << " ari=" << row.ari;
        if (rows.size() > 1) log << " ratio=" << row.median_seconds / rows[rows.size() - 2].median_seconds;
        log << '\n';
    }
    if (spec.output) {
        fs::create_directories(*spec.output);
        json j = json::array();
        for (const auto& r : rows) j.push_back({{"n", r.n}, {"median_seconds", r.median_seconds}, {"ari", r.ari}});
        write_json(j, *spec.output / "bench.json");
    }
    return rows;
}

// ---------------------------------------------------------------------------------------------
// eval

inline json cmd_eval(const fs::path& pred_path, const fs::path& truth_path) {
    const auto pred = io::read_labels(pred_path);
    const auto truth = io::read_labels(truth_path);
    if (pred.size() != truth.size())
        throw DataError(DataErrorCode::size_mismatch, pred_path.string(),
                        std::to_string(pred.size()) + " labels but '" + truth_path.string() + "' has " +
                            std::to_string(truth.size()));
    const auto e = evaluate(pred, truth);
    const auto a = ari(pred, truth);
    return {{"n", pred.size()}, {"ca", e.ca}, {"cf1", e.cf1}, {"nmi", e.nmi}, {"ari", e.ari},
            {"ari_degenerate", a.degenerate}};
}

} // namespace mvsck::harness
