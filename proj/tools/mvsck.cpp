// mvsck command-line tool: prepare, run, bench, eval.

#include "mvsck/harness.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <sstream>

namespace {

using namespace mvsck;
namespace h = mvsck::harness;

struct PipelineFlags {
    std::optional<Index> f;
    std::optional<int> k;
    std::optional<double> temperature;
    std::optional<std::string> kernel;
    std::optional<Index> kernel_components;
    std::optional<double> gamma;
    std::optional<double> coef0;
    std::optional<std::string> weight_mode;
    std::optional<std::string> concat_scale;
    std::optional<std::string> svd_method;
    std::optional<std::string> trace_affinity;
    std::optional<Index> embedding_dim;
    bool keep_first = false;
    bool no_view_weights = false;
    bool negate_traces = false;

    void attach(CLI::App* app) {
        app->add_option("--f", f, "singular vectors per view (default k)");
        app->add_option("--k", k, "number of clusters");
        app->add_option("--temperature", temperature, "softmax temperature T (default 0.1)");
        app->add_option("--kernel", kernel, "quadratic|rbf|sigmoid");
        app->add_option("--kernel-components", kernel_components, "Nystroem landmarks (default 10k)");
        app->add_option("--gamma", gamma, "RBF/sigmoid gamma (default 1/f)");
        app->add_option("--coef0", coef0, "sigmoid offset (default 1)");
        app->add_option("--weight-mode", weight_mode, "softmax|uniform|negated");
        app->add_option("--concat-scale", concat_scale, "sqrt|linear");
        app->add_option("--svd", svd_method, "auto|exact|randomized");
        app->add_option("--trace-affinity", trace_affinity, "normalized|unnormalized");
        app->add_option("--embedding-dim", embedding_dim, "spectral coordinates (default f)");
        app->add_flag("--keep-first", keep_first, "keep the leading singular vector in embeddings");
        app->add_flag("--no-view-weights", no_view_weights, "alias for --weight-mode uniform");
        app->add_flag("--negate-traces", negate_traces, "alias for --weight-mode negated");
    }

    h::json to_json() const {
        h::json j = h::json::object();
        if (f) j["f"] = *f;
        if (k) j["k"] = *k;
        if (temperature) j["temperature"] = *temperature;
        if (kernel) j["kernel"] = *kernel;
        if (kernel_components) j["kernel_components"] = *kernel_components;
        if (gamma) j["gamma"] = *gamma;
        if (coef0) j["coef0"] = *coef0;
        if (weight_mode) j["weight_mode"] = *weight_mode;
        if (no_view_weights) j["weight_mode"] = "uniform";
        if (negate_traces) j["weight_mode"] = "negated";
        if (concat_scale) j["concat_scale"] = *concat_scale;
        if (svd_method) j["svd_method"] = *svd_method;
        if (trace_affinity) j["trace_affinity"] = *trace_affinity;
        if (embedding_dim) j["embedding_dim"] = *embedding_dim;
        if (keep_first) j["drop_first"] = false;
        return j;
    }
};

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::uint64_t s = 0;
        if (!io::parse_number(std::string_view(item), s)) throw ConfigError("invalid seed '" + item + "'");
        seeds.push_back(s);
    }
    if (seeds.empty()) throw ConfigError("--seeds needs at least one seed");
    return seeds;
}

h::PrepareView parse_view_spec(const std::string& text) {
    // features=<path>[,graph=<path>][,p=<order>]
    h::PrepareView view;
    std::stringstream ss(text);
    std::string item;
    bool has_features = false;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw ConfigError("invalid --view entry '" + item + "'");
        const std::string key = item.substr(0, eq);
        const std::string value = item.substr(eq + 1);
        if (key == "features") {
            view.features = value;
            has_features = true;
        } else if (key == "graph") {
            view.graph = value;
        } else if (key == "p") {
            if (!io::parse_number(std::string_view(value), view.p)) throw ConfigError("invalid p '" + value + "'");
        } else {
            throw ConfigError("unknown --view key '" + key + "'");
        }
    }
    if (!has_features) throw ConfigError("--view needs features=<path>");
    return view;
}

int report(const Error& e) {
    std::cerr << "mvsck: " << e.what() << '\n';
    return exit_code(e.kind());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Scalable multi-view spectral clustering via kernel factorization"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "seeded clustering runs on a dataset directory");
    std::string run_dataset, run_output = "results", run_config, run_p, run_seeds, run_cache, run_norm;
    std::optional<int> run_count;
    std::optional<double> time_limit;
    bool parallel_runs = false;
    PipelineFlags run_flags;
    run->add_option("dataset", run_dataset, "dataset directory")->required();
    run->add_option("--output", run_output, "result directory");
    run->add_option("--config", run_config, "JSON config file");
    run->add_option("--p", run_p, "propagation orders <view:order,...>");
    run->add_option("--seeds", run_seeds, "comma-separated seeds (default 0,1,2,3,4)");
    run->add_option("--runs", run_count, "number of runs with seeds 0..runs-1");
    run->add_option("--time-limit", time_limit, "seconds per run");
    run->add_option("--cache-dir", run_cache, "propagation cache (default <output>/cache)");
    run->add_option("--normalization", run_norm, "sym_selfloop|sym|row");
    run->add_flag("--parallel-runs", parallel_runs, "run seeds concurrently");
    run_flags.attach(run);

    // prepare
    auto* prep = app.add_subcommand("prepare", "build a canonical dataset directory");
    std::vector<std::string> prep_views;
    std::string prep_output, prep_labels;
    std::optional<Index> add_knn;
    std::size_t knn_from = 0;
    std::optional<int> knn_p;
    bool self_loops = false, force = false, directed = false, synth = false;
    SynthOptions synth_opt;
    prep->add_option("--view", prep_views, "features=<file>[,graph=<file>][,p=<order>] (repeatable)");
    prep->add_option("--labels", prep_labels, "label file");
    prep->add_option("--output", prep_output, "dataset directory")->required();
    prep->add_option("--add-knn", add_knn, "append a k-NN graph view with this many neighbors");
    prep->add_option("--knn-from", knn_from, "view whose features feed the k-NN graph");
    prep->add_option("--knn-p", knn_p, "propagation order of the k-NN view");
    prep->add_flag("--self-loops", self_loops, "add self-connections to the k-NN graph");
    prep->add_flag("--directed", directed, "keep edge lists as given instead of symmetrizing");
    prep->add_flag("--force", force, "overwrite an existing dataset");
    prep->add_flag("--synth", synth, "generate a synthetic dataset");
    prep->add_option("--synth-n", synth_opt.n);
    prep->add_option("--synth-k", synth_opt.k);
    prep->add_option("--synth-views", synth_opt.views);
    prep->add_option("--synth-noise", synth_opt.noise);
    prep->add_option("--synth-seed", synth_opt.seed);
    prep->add_option("--synth-dim", synth_opt.feature_dim);
    prep->add_option("--synth-noise-views", synth_opt.pure_noise_views);
    prep->add_option("--synth-p", synth_opt.propagation_order);

    // bench
    auto* bench = app.add_subcommand("bench", "scaling benchmark on synthetic data");
    h::BenchSpec bench_spec;
    std::string bench_output;
    PipelineFlags bench_flags;
    bench->add_option("--sizes", bench_spec.sizes, "point counts")->delimiter(',');
    bench->add_option("--views", bench_spec.views);
    bench->add_option("--dim", bench_spec.feature_dim, "feature dimension");
    bench->add_option("--repeats", bench_spec.repeats);
    bench->add_option("--seed", bench_spec.seed);
    bench->add_option("--output", bench_output);
    bench_flags.attach(bench);

    // eval
    auto* eval = app.add_subcommand("eval", "score a label file against ground truth");
    std::string eval_pred, eval_truth;
    eval->add_option("predicted", eval_pred)->required();
    eval->add_option("truth", eval_truth)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_code(ErrorKind::config);
    }

    try {
        if (*run) {
            h::ExperimentSpec spec;
            spec.dataset = run_dataset;
            if (!run_config.empty()) h::apply_config_file(spec, run_config);
            h::apply_json(spec.config, run_flags.to_json());
            if (run_flags.k) spec.config.k = *run_flags.k;
            if (spec.config.k == 0) throw ConfigError("--k is required (flag or config file)");
            if (!run_p.empty())
                for (const auto& [v, p] : h::parse_propagation_orders(run_p)) spec.propagation_orders[v] = p;
            if (!run_seeds.empty()) spec.seeds = parse_seed_list(run_seeds);
            if (run_count) {
                if (*run_count < 1) throw ConfigError("--runs must be at least 1");
                spec.seeds.clear();
                for (int i = 0; i < *run_count; ++i) spec.seeds.push_back(static_cast<std::uint64_t>(i));
            }
            if (time_limit) spec.time_limit = *time_limit;
            if (!run_cache.empty()) spec.cache_dir = run_cache;
            if (!run_norm.empty()) {
                const auto n = parse_normalization(run_norm);
                if (!n) throw ConfigError("unknown normalization '" + run_norm + "'");
                spec.normalization = *n;
            }
            if (parallel_runs) spec.parallel_runs = true;
            spec.output = run_output;
            const auto summary = h::cmd_run(spec);
            for (const auto& r : summary.runs) {
                std::cout << "run " << r.index << " seed " << r.seed << ' ' << h::to_string(r.status);
                if (r.metrics)
                    std::cout << " ca=" << r.metrics->ca << " cf1=" << r.metrics->cf1 << " nmi=" << r.metrics->nmi
                              << " ari=" << r.metrics->ari;
                if (!r.message.empty()) std::cout << " (" << r.message << ')';
                std::cout << " " << r.seconds << "s\n";
            }
            std::cout << summary.aggregate.dump() << '\n';
            return summary.exit_code;
        }
        if (*prep) {
            h::PrepareSpec spec;
            for (const auto& v : prep_views) spec.views.push_back(parse_view_spec(v));
            if (!prep_labels.empty()) spec.labels = prep_labels;
            spec.add_knn = add_knn;
            spec.knn_source = knn_from;
            spec.knn_p = knn_p;
            spec.self_loops = self_loops;
            spec.symmetrize = !directed;
            if (synth) spec.synth = synth_opt;
            spec.output = prep_output;
            spec.force = force;
            const auto ds = h::cmd_prepare(spec);
            std::cout << "wrote " << prep_output << ": n=" << ds.n() << " views=" << ds.num_views() << '\n';
            return 0;
        }
        if (*bench) {
            h::apply_json(bench_spec.config, bench_flags.to_json());
            if (bench_flags.k) bench_spec.k = bench_spec.f = *bench_flags.k;
            if (bench_flags.f) bench_spec.f = *bench_flags.f;
            if (!bench_output.empty()) bench_spec.output = bench_output;
            h::cmd_bench(bench_spec, std::cout);
            return 0;
        }
        if (*eval) {
            std::cout << h::cmd_eval(eval_pred, eval_truth).dump(2) << '\n';
            return 0;
        }
    } catch (const Error& e) {
        return report(e);
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "mvsck: " << e.what() << '\n';
        return exit_code(ErrorKind::data);
    } catch (const std::exception& e) {
        std::cerr << "mvsck: " << e.what() << '\n';
        return exit_code(ErrorKind::numeric);
    }
    return 0;
}
