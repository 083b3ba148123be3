#include "cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "betamq/errors.hpp"
#include "betamq/exponential.hpp"
#include "betamq/graph.hpp"
#include "betamq/io.hpp"
#include "betamq/multiqueue.hpp"
#include "betamq/potential.hpp"
#include "betamq/process.hpp"
#include "betamq/sequential.hpp"
#include "betamq/sssp.hpp"
#include "betamq/stats.hpp"

namespace betamq::cli {

namespace {

constexpr const char* kVersion = "0.1.0";

namespace fs = std::filesystem;

struct CommonArgs {
    std::string out_dir;
    std::uint64_t seed = 1;
};

std::string default_out_dir() {
    if (const char* env = std::getenv("BETAMQ_OUT_DIR")) return env;
    return ".";
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
}

void write_manifest(const fs::path& dir, const std::string& subcommand,
                    const nlohmann::json& spec, std::uint64_t seed) {
    nlohmann::json j;
    j["subcommand"] = subcommand;
    j["spec"] = spec;
    j["seed"] = seed;
    j["versions"] = {{"betamq", kVersion}, {"compiler", __VERSION__}};
    write_file(dir / "manifest.json", j.dump(2) + "\n");
}

ProcessConfig build_config(std::size_t n, double beta, double gamma,
                           const std::string& pi_mode, std::uint64_t seed) {
    const PiMode mode = pi_mode_from_string(pi_mode);
    const auto pi = make_insertion_distribution(n, gamma, mode);
    const double c = 2.0;
    const double alpha = beta > 0.0 ? default_alpha(beta, gamma, c)
                                    : default_alpha(1.0, gamma, c);
    return ProcessConfig::create(n, beta, gamma, mode, pi, seed, alpha, c);
}

int run_simulate(std::size_t n, double beta, double gamma,
                 const std::string& pi_mode, std::size_t removals,
                 std::size_t inserts, const CommonArgs& common) {
    const auto cfg = build_config(n, beta, gamma, pi_mode, common.seed);
    const std::size_t M =
        inserts > 0 ? inserts : recommended_prefill(n, beta, removals);
    const auto result = run_prefixed_trace(cfg, M, removals);
    const fs::path dir(common.out_dir);
    fs::create_directories(dir);
    write_file(dir / "trace.csv", io::trace_csv(result.records));
    write_file(dir / "run.json", io::run_metadata_json(cfg, result) + "\n");
    write_manifest(dir, "simulate", nlohmann::json::parse(cfg.to_json()),
                   common.seed);
    return result.valid ? 0 : 1;
}

int run_equivalence(std::size_t n, std::size_t reps, std::size_t labels,
                    bool biased, bool adversarial, double significance,
                    const CommonArgs& common) {
    std::vector<double> pi;
    if (biased) {
        std::vector<double> weights(n);
        for (std::size_t i = 0; i < n; ++i) weights[i] = i % 2 == 0 ? 1.0 : 2.0;
        pi = make_insertion_distribution(n, 0.5, PiMode::kExplicit, weights);
    } else {
        pi = make_insertion_distribution(n, 0.0, PiMode::kUniform);
    }
    const std::size_t m = labels > 0 ? labels : 1000 * n;
    const auto report =
        rank_placement_test(pi, m, reps, significance, common.seed, adversarial);
    const fs::path dir(common.out_dir);
    fs::create_directories(dir);
    write_file(dir / "equivalence.json", report.to_json() + "\n");
    nlohmann::json spec{{"n", n},         {"reps", reps},
                        {"labels", m},    {"biased", biased},
                        {"adversarial", adversarial},
                        {"significance", significance}};
    write_manifest(dir, "equivalence", spec, common.seed);
    return report.aggregate_pass ? 0 : 1;
}

int run_potential(std::size_t n, double beta, std::size_t removals,
                  std::size_t sample_every, const CommonArgs& common) {
    const auto cfg = build_config(n, beta, 0.0, "uniform", common.seed);
    const std::size_t M = recommended_prefill(n, beta, removals);
    const auto result = potential_trajectory(cfg, M, removals, sample_every);
    const fs::path dir(common.out_dir);
    fs::create_directories(dir);
    write_file(dir / "trajectory.csv", io::trajectory_csv(result.series));
    nlohmann::json spec{{"config", nlohmann::json::parse(cfg.to_json())},
                        {"T", removals},
                        {"M", M},
                        {"sample_every", sample_every},
                        {"c_est", result.c_est},
                        {"c_est_first_half", result.c_est_first_half},
                        {"valid", result.valid}};
    write_manifest(dir, "potential", spec, common.seed);
    return result.valid ? 0 : 1;
}

int run_stripes(std::size_t n, double beta, std::size_t removals,
                std::vector<double> s_grid, const CommonArgs& common) {
    const auto cfg = build_config(n, beta, 0.0, "uniform", common.seed);
    const std::size_t M = recommended_prefill(n, beta, removals);
    const std::size_t sample_every = std::max<std::size_t>(1, removals / 500);
    const auto result = potential_trajectory(cfg, M, removals, sample_every);
    if (s_grid.empty()) {
        for (int k = 0; k < 4; ++k) s_grid.push_back(k / cfg.alpha);
    }
    const double a = std::log(std::max(result.c_est, 1.0)) / cfg.alpha;
    // Mean stripe counts over second-half snapshots.
    std::vector<double> b_gt(s_grid.size(), 0.0), b_lt(s_grid.size(), 0.0),
        bound(s_grid.size(), 0.0);
    std::size_t samples = 0;
    for (const auto& snap : result.series) {
        if (snap.t * 2 < removals) continue;
        std::vector<double> tops(snap.x.size());
        for (std::size_t j = 0; j < snap.x.size(); ++j) {
            tops[j] = snap.x[j] * static_cast<double>(n);
        }
        const auto report = stripe_counts(tops, cfg.alpha, a, s_grid);
        for (std::size_t k = 0; k < s_grid.size(); ++k) {
            b_gt[k] += static_cast<double>(report.b_gt[k]);
            b_lt[k] += static_cast<double>(report.b_lt[k]);
            bound[k] = report.bound[k];
        }
        ++samples;
    }
    if (samples > 0) {
        for (std::size_t k = 0; k < s_grid.size(); ++k) {
            b_gt[k] /= static_cast<double>(samples);
            b_lt[k] /= static_cast<double>(samples);
        }
    }
    const fs::path dir(common.out_dir);
    fs::create_directories(dir);
    write_file(dir / "stripes.csv", io::stripe_csv(s_grid, b_gt, b_lt, bound));
    nlohmann::json spec{{"config", nlohmann::json::parse(cfg.to_json())},
                        {"T", removals},
                        {"A", a},
                        {"samples", samples},
                        {"c_est", result.c_est}};
    write_manifest(dir, "stripes", spec, common.seed);
    return result.valid ? 0 : 1;
}

int run_scaling(std::vector<std::size_t> n_list, double beta,
                std::size_t t_factor, std::size_t seeds,
                const CommonArgs& common) {
    const auto table =
        scaling_experiment(n_list, beta, t_factor, seeds, common.seed);
    const fs::path dir(common.out_dir);
    fs::create_directories(dir);
    write_file(dir / "experiment.csv", io::experiment_csv(table));
    nlohmann::json spec{{"n_list", n_list},
                        {"beta", beta},
                        {"t_factor", t_factor},
                        {"seeds", seeds}};
    write_manifest(dir, "scaling", spec, common.seed);
    return 0;
}

int run_diverge(std::size_t n, std::size_t checkpoint, std::size_t reps,
                const CommonArgs& common) {
    if (checkpoint == 0) {
        checkpoint = static_cast<std::size_t>(
            std::ceil(8.0 * static_cast<double>(n) *
                      std::log(static_cast<double>(n))));
    }

    ScalingTable table;
    for (double beta : {0.0, 1.0}) {
        const auto cfg = build_config(n, beta, 0.0, "uniform", common.seed);
        const auto means = mean_max_rank_at_checkpoints(
            cfg, {checkpoint, 4 * checkpoint}, reps);
        table.rows.push_back(
            {n, beta, "mean_max_rank_at_t", means[0], 0.0, reps});
        table.rows.push_back(
            {n, beta, "mean_max_rank_at_4t", means[1], 0.0, reps});
        table.rows.push_back(
            {n, beta, "growth_ratio", means[1] / means[0], 0.0, reps});
    }
    const fs::path dir(common.out_dir);
    fs::create_directories(dir);
    write_file(dir / "experiment.csv", io::experiment_csv(table));
    nlohmann::json spec{{"n", n}, {"t", checkpoint}, {"reps", reps}};
    write_manifest(dir, "diverge", spec, common.seed);
    return 0;
}

int run_bench(std::size_t n, double beta, const std::string& mode_name,
              std::size_t threads, double duration, std::size_t prefill,
              std::size_t trials, const CommonArgs& common) {
    const MqMode mode = mode_name == "coarse-atomic" ? MqMode::kCoarseAtomic
                                                     : MqMode::kFineGrained;
    const auto report = throughput_benchmark(n, beta, mode, common.seed, threads,
                                             duration, prefill, trials);
    const fs::path dir(common.out_dir);
    fs::create_directories(dir);
    write_file(dir / "bench.json", report.to_json() + "\n");
    nlohmann::json spec{{"n", n},           {"beta", beta},
                        {"mode", mode_name}, {"threads", threads},
                        {"duration_s", duration}, {"prefill", prefill},
                        {"trials", trials}};
    write_manifest(dir, "bench", spec, common.seed);
    return report.valid ? 0 : 1;
}

int run_sssp(const std::string& graph_path, std::size_t random_v,
             std::size_t random_e, std::uint32_t source, std::size_t threads,
             std::size_t queues, double beta, const std::string& mode_name,
             bool dump_distances, const CommonArgs& common) {
    Graph graph;
    if (!graph_path.empty()) {
        graph = load_dimacs(graph_path);
    } else {
        graph = make_random_graph(random_v, random_e, 10000, common.seed);
    }
    const MqMode mode = mode_name == "coarse-atomic" ? MqMode::kCoarseAtomic
                                                     : MqMode::kFineGrained;
    const auto reference = sssp_reference(graph, source);
    const auto relaxed = sssp_multiqueue(graph, source, threads, queues, beta,
                                         mode, common.seed);
    const bool exact = reference.dist == relaxed.dist;

    std::size_t reached = 0;
    for (std::size_t v = 1; v < reference.dist.size(); ++v) {
        if (reference.dist[v] != kUnreachable) ++reached;
    }
    nlohmann::json j;
    j["vertices"] = graph.vertex_count();
    j["edges"] = graph.edge_count();
    j["source"] = source;
    j["reached"] = reached;
    j["exact_match"] = exact;
    j["relaxed"] = {{"pops", relaxed.pops},
                    {"stale_pops", relaxed.stale_pops},
                    {"relaxations", relaxed.relaxations}};
    j["reference"] = {{"pops", reference.pops},
                      {"stale_pops", reference.stale_pops},
                      {"relaxations", reference.relaxations}};
    const fs::path dir(common.out_dir);
    fs::create_directories(dir);
    write_file(dir / "sssp.json", j.dump(2) + "\n");
    if (dump_distances) {
        std::string csv = "vertex,distance\n";
        for (std::size_t v = 1; v < relaxed.dist.size(); ++v) {
            csv += std::to_string(v) + ",";
            csv += relaxed.dist[v] == kUnreachable
                       ? "unreachable"
                       : std::to_string(relaxed.dist[v]);
            csv += "\n";
        }
        write_file(dir / "distances.csv", csv);
    }
    nlohmann::json spec{{"graph", graph_path.empty() ? "random" : graph_path},
                        {"random_v", random_v},
                        {"random_e", random_e},
                        {"source", source},
                        {"threads", threads},
                        {"queues", queues},
                        {"beta", beta},
                        {"mode", mode_name}};
    write_manifest(dir, "sssp", spec, common.seed);
    return exact ? 0 : 1;
}

}  // namespace

int dispatch(int argc, const char* const* argv) {
    CLI::App app{"Relaxed multi-queue priority scheduling workbench"};
    app.require_subcommand(1);

    CommonArgs common;
    common.out_dir = default_out_dir();

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out", common.out_dir, "output directory");
        sub->add_option("--seed", common.seed, "reproducibility seed");
    };

    // simulate
    std::size_t n = 16, removals = 100000, inserts = 0;
    double beta = 1.0, gamma = 0.0;
    std::string pi_mode = "uniform";
    auto* simulate = app.add_subcommand("simulate", "sequential trace run");
    simulate->add_option("--n", n, "queue count")->check(CLI::Range(2, 1 << 20));
    simulate->add_option("--beta", beta)->check(CLI::Range(0.0, 1.0));
    simulate->add_option("--gamma", gamma)->check(CLI::Range(0.0, 0.999));
    simulate->add_option("--pi-mode", pi_mode)
        ->check(CLI::IsMember({"uniform", "linear-bias"}));
    simulate->add_option("--T", removals, "removal count");
    simulate->add_option("--M", inserts, "insert count (default T + buffer)");
    add_common(simulate);

    // equivalence
    std::size_t reps = 200, labels = 0;
    bool biased = false, adversarial = false;
    double significance = 0.001;
    auto* equivalence =
        app.add_subcommand("equivalence", "rank placement distribution test");
    equivalence->add_option("--n", n)->check(CLI::Range(2, 4096));
    equivalence->add_option("--reps", reps);
    equivalence->add_option("--labels", labels, "labels per rep (default 1000n)");
    equivalence->add_flag("--biased", biased, "alternating 1:2 weights");
    equivalence->add_flag("--adversarial", adversarial,
                          "round-robin control (must fail)");
    equivalence->add_option("--significance", significance);
    add_common(equivalence);

    // potential
    std::size_t sample_every = 1000;
    auto* potential =
        app.add_subcommand("potential", "potential-function trajectory");
    potential->add_option("--n", n)->check(CLI::Range(2, 1 << 20));
    potential->add_option("--beta", beta)->check(CLI::Range(0.0, 1.0));
    potential->add_option("--T", removals);
    potential->add_option("--sample-every", sample_every);
    add_common(potential);

    // stripes
    std::vector<double> s_grid;
    auto* stripes = app.add_subcommand("stripes", "stripe-count decay table");
    stripes->add_option("--n", n)->check(CLI::Range(2, 1 << 20));
    stripes->add_option("--beta", beta)->check(CLI::Range(0.0, 1.0));
    stripes->add_option("--T", removals);
    stripes->add_option("--s-grid", s_grid, "grid of s values (default k/alpha)");
    add_common(stripes);

    // scaling
    std::vector<std::size_t> n_list = {16, 32, 64, 128};
    std::size_t t_factor = 200, seeds = 10;
    auto* scaling = app.add_subcommand("scaling", "rank/gap scaling tables");
    scaling->add_option("--n-list", n_list);
    scaling->add_option("--beta", beta)->check(CLI::Range(0.0, 1.0));
    scaling->add_option("--t-factor", t_factor, "removals = t_factor * n^2");
    scaling->add_option("--seeds", seeds);
    add_common(scaling);

    // diverge
    std::size_t checkpoint = 0;
    auto* diverge =
        app.add_subcommand("diverge", "single-choice divergence checkpoints");
    diverge->add_option("--n", n)->check(CLI::Range(2, 1 << 20));
    diverge->add_option("--t", checkpoint, "checkpoint (default 8 n ln n)");
    diverge->add_option("--reps", reps);
    add_common(diverge);

    // bench
    std::size_t threads = 4, prefill = 1000000, trials = 10;
    double duration = 2.0;
    std::string mode_name = "fine-grained";
    auto* bench = app.add_subcommand("bench", "throughput benchmark");
    bench->add_option("--n", n)->check(CLI::Range(1, 1 << 20));
    bench->add_option("--beta", beta)->check(CLI::Range(0.0, 1.0));
    bench->add_option("--mode", mode_name)
        ->check(CLI::IsMember({"fine-grained", "coarse-atomic"}));
    bench->add_option("--threads", threads)->check(CLI::Range(1, 256));
    bench->add_option("--duration", duration, "seconds per trial");
    bench->add_option("--prefill", prefill);
    bench->add_option("--trials", trials);
    add_common(bench);

    // sssp
    std::string graph_path;
    std::size_t random_v = 10000, random_e = 50000, queues = 0;
    std::uint32_t source = 1;
    bool dump_distances = false;
    auto* sssp = app.add_subcommand("sssp", "single-source shortest paths");
    sssp->add_option("--graph", graph_path, "DIMACS .gr file");
    sssp->add_option("--random-v", random_v, "random graph vertices");
    sssp->add_option("--random-e", random_e, "random graph edges");
    sssp->add_option("--source", source);
    sssp->add_option("--threads", threads)->check(CLI::Range(1, 256));
    sssp->add_option("--queues", queues, "queue count (default 2*threads)");
    sssp->add_option("--beta", beta)->check(CLI::Range(0.0, 1.0));
    sssp->add_option("--mode", mode_name)
        ->check(CLI::IsMember({"fine-grained", "coarse-atomic"}));
    sssp->add_flag("--dump-distances", dump_distances);
    add_common(sssp);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help
            return app.exit(e);
        }
        app.exit(e);
        return 2;
    }

    try {
        if (simulate->parsed()) {
            return run_simulate(n, beta, gamma, pi_mode, removals, inserts,
                                common);
        }
        if (equivalence->parsed()) {
            return run_equivalence(n, reps, labels, biased, adversarial,
                                   significance, common);
        }
        if (potential->parsed()) {
            return run_potential(n, beta, removals, sample_every, common);
        }
        if (stripes->parsed()) {
            return run_stripes(n, beta, removals, s_grid, common);
        }
        if (scaling->parsed()) {
            return run_scaling(n_list, beta, t_factor, seeds, common);
        }
        if (diverge->parsed()) {
            return run_diverge(n, checkpoint, reps, common);
        }
        if (bench->parsed()) {
            return run_bench(n, beta, mode_name, threads, duration, prefill,
                             trials, common);
        }
        if (sssp->parsed()) {
            return run_sssp(graph_path, random_v, random_e, source, threads,
                            queues, beta, mode_name, dump_distances, common);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace betamq::cli
