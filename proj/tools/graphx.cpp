// graphx: synthesize data, build graphs, solve, evaluate and sweep experiments.
//
// Exit codes: 0 success, 2 usage or validation error, 3 outer iteration limit
// reached (outputs still written), 4 numerical failure.

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iterator>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "graphx/config.hpp"
#include "graphx/graphx.hpp"
#include "graphx/report_io.hpp"

namespace {

using graphx::Error;
using graphx::ErrorKind;
using graphx::RunConfig;

constexpr int exit_ok = 0;
constexpr int exit_usage = 2;
constexpr int exit_outer_limit = 3;
constexpr int exit_numerical = 4;

void setup_logging() {
    auto logger = spdlog::stderr_color_st("graphx");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("GRAPHX_LOG")) {
        const std::string v = env;
        if (v == "error") spdlog::set_level(spdlog::level::err);
        else if (v == "warn") spdlog::set_level(spdlog::level::warn);
        else if (v == "info") spdlog::set_level(spdlog::level::info);
        else if (v == "debug") spdlog::set_level(spdlog::level::debug);
        else spdlog::warn("ignoring GRAPHX_LOG={} (expected error|warn|info|debug)", v);
    }
}

/// Value of --config, found before the real parse so the file can supply
/// defaults that explicit flags then override.
std::string find_config_arg(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--config" && i + 1 < argc) return argv[i + 1];
        if (a.rfind("--config=", 0) == 0) return a.substr(9);
    }
    return {};
}

const std::string& require_path(const RunConfig& cfg, const std::string& key,
                                const std::string& flag) {
    const auto it = cfg.paths.find(key);
    if (it == cfg.paths.end() || it->second.empty()) {
        throw Error(ErrorKind::InvalidArgument, "missing required option --" + flag);
    }
    return it->second;
}

std::string optional_path(const RunConfig& cfg, const std::string& key) {
    const auto it = cfg.paths.find(key);
    return it == cfg.paths.end() ? std::string{} : it->second;
}

void write_run_config(const RunConfig& cfg, const std::string& primary_output) {
    const std::string path = primary_output + ".run.json";
    graphx::save_config(path, cfg);
    spdlog::info("resolved config written to {}", path);
}

std::string csv_path_for(const std::string& report) {
    const auto dot = report.rfind(".json");
    if (dot != std::string::npos && dot + 5 == report.size()) return report.substr(0, dot) + ".csv";
    return report + ".csv";
}

// Flag bindings that need post-processing (enums, "auto").
struct Pending {
    std::string metric, kernel, symmetrize, sigma;
    std::string step_rule, acceleration, init, shift;
};

void load_pending(const RunConfig& c, Pending& p) {
    using namespace graphx::detail;
    p.metric = enum_name(c.kernel.metric, metric_names);
    p.kernel = enum_name(c.kernel.kernel, kernel_names);
    p.symmetrize = enum_name(c.kernel.symmetrization, symmetrize_names);
    if (!c.kernel.sigma_auto) {
        std::string buf;
        graphx::csv::detail::append_double(buf, c.kernel.sigma);
        p.sigma = buf;
    } else {
        p.sigma = "auto";
    }
    p.step_rule = enum_name(c.solver.step_rule, step_rule_names);
    p.acceleration = enum_name(c.solver.acceleration, acceleration_names);
    p.init = enum_name(c.solver.init, init_names);
    p.shift = enum_name(c.solver.shift, shift_names);
}

void apply_pending(RunConfig& c, const Pending& p) {
    using namespace graphx::detail;
    c.kernel.metric = enum_value(p.metric, metric_names, "--metric");
    c.kernel.kernel = enum_value(p.kernel, kernel_names, "--kernel");
    c.kernel.symmetrization = enum_value(p.symmetrize, symmetrize_names, "--symmetrize");
    if (p.sigma == "auto") {
        c.kernel.sigma_auto = true;
        c.kernel.sigma = 0.0;
    } else {
        double s = 0.0;
        try {
            s = graphx::csv::detail::parse_double(p.sigma, 0);
        } catch (const Error&) {
            throw Error(ErrorKind::InvalidArgument, "--sigma must be a positive number or 'auto'");
        }
        graphx::require(s > 0.0, ErrorKind::InvalidArgument, "--sigma must be > 0");
        c.kernel.sigma_auto = false;
        c.kernel.sigma = s;
    }
    c.solver.step_rule = enum_value(p.step_rule, step_rule_names, "--step-rule");
    c.solver.acceleration = enum_value(p.acceleration, acceleration_names, "--acceleration");
    c.solver.init = enum_value(p.init, init_names, "--init");
    c.solver.shift = enum_value(p.shift, shift_names, "--shift");
}

void add_path(CLI::App* app, RunConfig& cfg, const std::string& flag, const std::string& key,
              const std::string& help) {
    app->add_option("--" + flag, cfg.paths[key], help);
}

void add_kernel_flags(CLI::App* app, RunConfig& cfg, Pending& p) {
    app->add_option("--k", cfg.kernel.k, "neighbors per node")->capture_default_str();
    app->add_option("--metric", p.metric, "euclidean|cosine")->capture_default_str();
    app->add_option("--kernel", p.kernel, "gaussian|binary")->capture_default_str();
    app->add_option("--sigma", p.sigma, "Gaussian bandwidth or 'auto'")->capture_default_str();
    app->add_option("--symmetrize", p.symmetrize, "mean|max")->capture_default_str();
}

void add_solver_flags(CLI::App* app, RunConfig& cfg, Pending& p) {
    auto& s = cfg.solver;
    app->add_option("--classes", cfg.classes, "class count (0 infers from labels)")
        ->capture_default_str();
    app->add_option("--epsilon", cfg.epsilon, "seed margin")->capture_default_str();
    app->add_option("--dt", s.dt, "outer step size")->capture_default_str();
    app->add_option("--sigma0", s.sigma0, "initial dual step")->capture_default_str();
    app->add_option("--tau0", s.tau0, "initial primal step")->capture_default_str();
    app->add_option("--step-rule", p.step_rule, "paper|safeguarded")->capture_default_str();
    app->add_option("--acceleration", p.acceleration, "paper|standard")->capture_default_str();
    app->add_option("--init", p.init, "diffusion|seeds|random")->capture_default_str();
    app->add_option("--shift", p.shift, "median|degree-median|none")->capture_default_str();
    app->add_option("--inner-max", s.inner_max, "inner iteration cap")->capture_default_str();
    app->add_option("--inner-tol", s.inner_tol, "inner relative tolerance")
        ->capture_default_str();
    app->add_option("--outer-max", s.outer_max, "outer iteration cap")->capture_default_str();
    app->add_option("--outer-tol", s.outer_tol, "outer tolerance on the ratio sum")
        ->capture_default_str();
    app->add_option("--seed", s.seed, "solver RNG seed")->capture_default_str();
}

// ---------------------------------------------------------------------------

int run_synth(RunConfig& cfg) {
    if (cfg.generator == "two-moons") {
        const auto& features = require_path(cfg, "out_features", "out-features");
        const auto& truth = require_path(cfg, "out_truth", "out-truth");
        const auto data = graphx::synth_two_moons(cfg.n, cfg.noise, cfg.synth_seed);
        graphx::csv::save_features(features, data.features);
        graphx::csv::save_truth(truth, data.truth);
        write_run_config(cfg, features);
        std::cout << "two-moons: " << data.features.rows() << " points -> " << features << ", "
                  << truth << "\n";
        return exit_ok;
    }
    const auto& graph_path = require_path(cfg, "out_graph", "out-graph");
    const auto& truth = require_path(cfg, "out_truth", "out-truth");
    const auto sample = graphx::synth_sbm(cfg.sizes, cfg.p_in, cfg.p_out, cfg.synth_seed);
    graphx::save_graph(graph_path, sample.graph);
    graphx::csv::save_truth(truth, sample.truth);
    write_run_config(cfg, graph_path);
    std::cout << "sbm: n=" << sample.graph.nodes() << " edges=" << sample.graph.edge_count()
              << " attempts=" << sample.attempts << "\n";
    return exit_ok;
}

int run_build_graph(RunConfig& cfg) {
    const auto& features_path = require_path(cfg, "features", "features");
    const auto& out = require_path(cfg, "graph", "out");
    const auto features = graphx::csv::load_features(features_path);
    const auto graph = graphx::build_knn_graph(features, cfg.kernel);
    graphx::save_graph(out, graph);
    write_run_config(cfg, out);
    const auto& d = graph.degrees();
    double mean = 0.0;
    for (double x : d) mean += x;
    mean /= static_cast<double>(d.size());
    std::cout << "n=" << graph.nodes() << " edges=" << graph.edge_count()
              << " degree min=" << *std::min_element(d.begin(), d.end()) << " mean=" << mean
              << " max=" << *std::max_element(d.begin(), d.end()) << "\n";
    return exit_ok;
}

int run_solve(RunConfig& cfg) {
    const auto& graph_path = require_path(cfg, "graph", "graph");
    const auto& labels_path = require_path(cfg, "labels", "labels");
    const auto& scores_path = require_path(cfg, "scores", "out-scores");
    const auto trace_path = optional_path(cfg, "trace");

    const auto graph = graphx::load_graph(graph_path);
    const auto constraints =
        graphx::csv::load_labels(labels_path, graph.nodes(), cfg.classes, cfg.epsilon);
    spdlog::info("solving n={} edges={} classes={} seeds={}", graph.nodes(), graph.edge_count(),
                 constraints.classes(), constraints.seed_count());
    const auto result = graphx::solve(graph, constraints, cfg.solver);
    for (const auto& w : result.trace.warnings) spdlog::warn("{}", w);
    for (std::size_t t = 0; t < result.trace.records.size(); ++t) {
        const auto& r = result.trace.records[t];
        spdlog::debug("outer {}: ratio_sum={} inner_iters={} residual={}", t, r.ratio_sum,
                      r.inner_iters, r.residual);
    }

    graphx::csv::save_scores(scores_path, result.prediction);
    if (!trace_path.empty()) graphx::save_json(trace_path, graphx::trace_to_json(result.trace));
    write_run_config(cfg, scores_path);
    std::cout << "outer_iters=" << result.trace.records.size()
              << " converged=" << (result.trace.converged ? "true" : "false") << "\n";
    if (!result.trace.converged) {
        spdlog::warn("outer_max={} reached before the ratio sum settled", cfg.solver.outer_max);
        return exit_outer_limit;
    }
    return exit_ok;
}

int run_eval(RunConfig& cfg) {
    const auto& scores_path = require_path(cfg, "scores", "scores");
    const auto& truth_path = require_path(cfg, "truth", "truth");
    const auto& labels_path = require_path(cfg, "labels", "labels");
    const auto& report_path = require_path(cfg, "report", "report");

    const auto prediction = graphx::csv::load_scores(scores_path);
    const auto truth = graphx::csv::load_truth(truth_path);
    graphx::require(truth.size() == prediction.labels.size(), ErrorKind::ShapeMismatch,
                    std::to_string(truth.size()) + " truth rows for " +
                        std::to_string(prediction.labels.size()) + " score rows");
    const auto constraints = graphx::csv::load_labels(labels_path, truth.size(),
                                                      prediction.scores.classes(), cfg.epsilon);
    const auto report = graphx::evaluate(prediction, truth, constraints);
    for (const auto& w : report.warnings) spdlog::warn("{}", w);
    graphx::save_json(report_path, graphx::eval_to_json(report));
    write_run_config(cfg, report_path);
    std::cout << "accuracy=" << report.accuracy << " average_auc=" << report.average_auc
              << " n_eval=" << report.n_eval << "\n";
    return exit_ok;
}

int run_experiment(RunConfig& cfg) {
    const auto& truth_path = require_path(cfg, "truth", "truth");
    const auto& report_path = require_path(cfg, "report", "report");
    const auto graph_path = optional_path(cfg, "graph");
    const auto features_path = optional_path(cfg, "features");
    graphx::require(graph_path.empty() != features_path.empty(), ErrorKind::InvalidArgument,
                    "give exactly one of --graph or --features");

    const auto truth = graphx::csv::load_truth(truth_path);
    const auto graph = graph_path.empty()
                           ? graphx::build_knn_graph(graphx::csv::load_features(features_path),
                                                     cfg.kernel)
                           : graphx::load_graph(graph_path);
    graphx::require(truth.size() == graph.nodes(), ErrorKind::ShapeMismatch,
                    std::to_string(truth.size()) + " truth rows for " +
                        std::to_string(graph.nodes()) + " nodes");
    const std::size_t classes = graphx::class_count(truth);
    graphx::validate_truth(truth, graph.nodes(), classes);

    graphx::ExperimentSpec spec;
    spec.fractions = cfg.fractions;
    spec.seeds = cfg.seeds;
    spec.epsilon = cfg.epsilon;
    spec.solver = cfg.solver;
    spec.jobs = cfg.jobs;
    const auto report = graphx::stability_experiment(graph, truth, classes, spec);
    for (const auto& w : report.warnings) spdlog::warn("{}", w);

    graphx::save_json(report_path, graphx::experiment_to_json(report));
    {
        const auto csv_path = csv_path_for(report_path);
        std::ofstream out(csv_path, std::ios::trunc);
        if (!out) throw Error(ErrorKind::Io, "cannot open " + csv_path + " for writing");
        graphx::write_experiment_csv(out, report);
    }
    write_run_config(cfg, report_path);
    for (const auto& s : report.summary) {
        std::cout << "fraction=" << s.fraction << " cells=" << s.cells
                  << " accuracy_mean=" << s.accuracy_mean << " accuracy_std=" << s.accuracy_std
                  << " auc_mean=" << s.auc_mean << "\n";
    }
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    setup_logging();

    RunConfig cfg;
    Pending pending;
    const std::string config_path = find_config_arg(argc, argv);
    try {
        if (!config_path.empty()) cfg = graphx::load_config(config_path);
        load_pending(cfg, pending);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    }
    std::string config_flag = config_path;

    CLI::App app{"graphx: p=1 graph-Laplacian semi-supervised classification"};
    app.require_subcommand(1);
    app.add_option("--config", config_flag, "resolved run config (JSON) to start from");
    app.fallthrough();

    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    synth->require_subcommand(1);
    auto* moons = synth->add_subcommand("two-moons", "two interleaved half circles");
    moons->add_option("--n", cfg.n, "points (even)")->capture_default_str();
    moons->add_option("--noise", cfg.noise, "Gaussian noise std")->capture_default_str();
    moons->add_option("--seed", cfg.synth_seed, "generator seed")->capture_default_str();
    add_path(moons, cfg, "out-features", "out_features", "features CSV");
    add_path(moons, cfg, "out-truth", "out_truth", "truth CSV");
    auto* sbm = synth->add_subcommand("sbm", "stochastic block model graph");
    sbm->add_option("--sizes", cfg.sizes, "block sizes, comma separated")->delimiter(',');
    sbm->add_option("--p-in", cfg.p_in, "within-block edge probability")->capture_default_str();
    sbm->add_option("--p-out", cfg.p_out, "between-block edge probability")
        ->capture_default_str();
    sbm->add_option("--seed", cfg.synth_seed, "generator seed")->capture_default_str();
    add_path(sbm, cfg, "out-graph", "out_graph", "graph file (GXG1)");
    add_path(sbm, cfg, "out-truth", "out_truth", "truth CSV");

    auto* build = app.add_subcommand("build-graph", "k-NN similarity graph from features");
    add_path(build, cfg, "features", "features", "features CSV");
    add_path(build, cfg, "out", "graph", "graph file (GXG1)");
    add_kernel_flags(build, cfg, pending);

    auto* solve = app.add_subcommand("solve", "run the p=1 ratio solver");
    add_path(solve, cfg, "graph", "graph", "graph file (GXG1)");
    add_path(solve, cfg, "labels", "labels", "seed labels CSV (node,class)");
    add_path(solve, cfg, "out-scores", "scores", "scores CSV");
    add_path(solve, cfg, "out-trace", "trace", "per-step trace JSON");
    add_solver_flags(solve, cfg, pending);

    auto* eval = app.add_subcommand("eval", "AUC and accuracy over non-seed nodes");
    add_path(eval, cfg, "scores", "scores", "scores CSV");
    add_path(eval, cfg, "truth", "truth", "truth CSV");
    add_path(eval, cfg, "labels", "labels", "seed labels CSV; seeds are excluded");
    add_path(eval, cfg, "report", "report", "report JSON");

    auto* experiment = app.add_subcommand("experiment", "labeled-fraction x seed sweep");
    add_path(experiment, cfg, "graph", "graph", "graph file (GXG1)");
    add_path(experiment, cfg, "features", "features", "features CSV (graph built from it)");
    add_path(experiment, cfg, "truth", "truth", "truth CSV");
    add_path(experiment, cfg, "report", "report", "report JSON (CSV mirror alongside)");
    experiment->add_option("--fractions", cfg.fractions, "labeled fractions")->delimiter(',');
    experiment->add_option("--seeds", cfg.seeds, "partition seeds")->delimiter(',');
    experiment->add_option("--jobs", cfg.jobs, "parallel cells")->capture_default_str();
    add_kernel_flags(experiment, cfg, pending);
    add_solver_flags(experiment, cfg, pending);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }

    // Empty entries come from path flags that were never given.
    for (auto it = cfg.paths.begin(); it != cfg.paths.end();) {
        it = it->second.empty() ? cfg.paths.erase(it) : std::next(it);
    }

    try {
        apply_pending(cfg, pending);
        if (moons->parsed()) {
            cfg.command = "synth";
            cfg.generator = "two-moons";
            return run_synth(cfg);
        }
        if (sbm->parsed()) {
            cfg.command = "synth";
            cfg.generator = "sbm";
            return run_synth(cfg);
        }
        if (build->parsed()) {
            cfg.command = "build-graph";
            return run_build_graph(cfg);
        }
        if (solve->parsed()) {
            cfg.command = "solve";
            return run_solve(cfg);
        }
        if (eval->parsed()) {
            cfg.command = "eval";
            return run_eval(cfg);
        }
        cfg.command = "experiment";
        return run_experiment(cfg);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.kind() == ErrorKind::NonFinite ? exit_numerical : exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    }
}
