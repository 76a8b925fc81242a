// Command-line front end: generate instance suites, run training portfolios,
// aggregate results, exact-solve small instances, and gradient-check the
// backward pass.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pignn/experiment.hpp"
#include "pignn/gradcheck.hpp"
#include "pignn/oracle.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonOpts {
    pignn::ExperimentConfig config;
    std::string problem = "maxcut";
    std::string manifest;
    bool trace = false;
};

void add_experiment_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--problem", o.problem, "Problem: maxcut or mis")
        ->check(CLI::IsMember({"maxcut", "mis"}));
    cmd->add_option("--n", o.config.sizes, "Graph sizes");
    cmd->add_option("--d", o.config.degrees, "Regularities");
    cmd->add_option("--graphs", o.config.graphs_per_setting, "Graphs per (n, d) setting");
    cmd->add_option("--seeds", o.config.n_seeds, "Random initializations per run");
    cmd->add_option("--variants", o.config.variants, "Variant subset (default: all eight)");
    cmd->add_option("--threads", o.config.threads, "Worker threads");
    cmd->add_option("--out", o.config.out_dir, "Output directory");
    cmd->add_option("--master-seed", o.config.master_seed, "Master seed for the whole grid");
    cmd->add_option("--max-epochs", o.config.train.max_epochs, "Epoch budget per run");
    cmd->add_option("--lr", o.config.train.lr, "Learning rate");
    cmd->add_option("--patience", o.config.train.es_patience, "Early-stopping patience");
    cmd->add_option("--mis-penalty", o.config.mis_penalty, "MIS edge penalty (> 1)");
    cmd->add_flag("--trace", o.trace, "Write activation-histogram trace CSVs");
}

int run_oracle(const std::string& problem, const std::vector<std::string>& graph_files) {
    const pignn::Problem p = pignn::problem_from_string(problem);
    for (const auto& path : graph_files) {
        std::ifstream in(path);
        if (!in) {
            std::cerr << "oracle: cannot read " << path << "\n";
            return 1;
        }
        const pignn::Graph g = pignn::read_edgelist(in);
        const pignn::ExactSolution sol = pignn::exact_solve(p, g);
        std::cout << path << ": value=" << sol.value << " optima=" << sol.count_optimal
                  << " assignment=";
        for (uint8_t b : sol.assignment) std::cout << int(b);
        std::cout << "\n";
    }
    return 0;
}

int run_gradcheck_cmd(int points, uint64_t seed, double tolerance) {
    const auto reports = pignn::run_gradcheck(points, seed, tolerance);
    bool ok = true;
    for (const auto& r : reports) {
        std::cout << r.variant << ": points=" << r.points << " max_err=" << r.max_err << " "
                  << (r.pass ? "ok" : "FAIL") << "\n";
        ok = ok && r.pass;
    }
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Unsupervised GNN pipeline for MaxCut/MIS over d-regular graphs"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Plain-text key-value config file; flags win");

    CommonOpts gen_opts, run_opts;
    std::string report_results = "out/results.csv";
    std::string report_out = "out/aggregate.csv";
    std::string tie_scheme = "competition";
    std::string oracle_problem = "maxcut";
    std::vector<std::string> oracle_graphs;
    int gc_points = 20;
    uint64_t gc_seed = 1;
    double gc_tolerance = 1e-4;

    CLI::App* gen = app.add_subcommand("generate", "Generate d-regular instance files + manifest");
    add_experiment_flags(gen, gen_opts);

    CLI::App* run = app.add_subcommand("run", "Train the portfolio over a generated manifest");
    add_experiment_flags(run, run_opts);
    run->add_option("--manifest", run_opts.manifest, "Manifest path (default <out>/manifest.csv)");

    CLI::App* report = app.add_subcommand("report", "Aggregate a results CSV into BoN/Avg/RR table");
    report->add_option("--results", report_results, "Per-run results CSV");
    report->add_option("--out", report_out, "Aggregate CSV to write");
    report->add_option("--tie-scheme", tie_scheme, "MRR tie handling")
        ->check(CLI::IsMember({"competition", "block-average"}));

    CLI::App* oracle = app.add_subcommand("oracle", "Exact-solve small edge-list instances");
    oracle->add_option("--problem", oracle_problem, "Problem: maxcut or mis")
        ->check(CLI::IsMember({"maxcut", "mis"}));
    oracle->add_option("graphs", oracle_graphs, "Edge-list files")->required();

    CLI::App* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient suite");
    gradcheck->add_option("--points", gc_points, "Points per variant");
    gradcheck->add_option("--seed", gc_seed, "RNG seed");
    gradcheck->add_option("--tolerance", gc_tolerance, "Max scaled error");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            gen_opts.config.problem = pignn::problem_from_string(gen_opts.problem);
            gen_opts.config.train.trace = gen_opts.trace;
            const fs::path manifest = pignn::cmd_generate(gen_opts.config);
            std::cout << "wrote " << manifest.string() << "\n";
            return 0;
        }
        if (run->parsed()) {
            run_opts.config.problem = pignn::problem_from_string(run_opts.problem);
            run_opts.config.train.trace = run_opts.trace;
            const fs::path manifest = run_opts.manifest.empty()
                                          ? fs::path(run_opts.config.out_dir) / "manifest.csv"
                                          : fs::path(run_opts.manifest);
            const fs::path results = pignn::cmd_run(run_opts.config, manifest);
            std::cout << "wrote " << results.string() << "\n";
            return 0;
        }
        if (report->parsed()) {
            const auto scheme = tie_scheme == "competition" ? pignn::TieScheme::Competition
                                                            : pignn::TieScheme::BlockAverage;
            const fs::path out = pignn::cmd_report(report_results, report_out, scheme);
            std::cout << "wrote " << out.string() << "\n";
            return 0;
        }
        if (oracle->parsed()) return run_oracle(oracle_problem, oracle_graphs);
        if (gradcheck->parsed()) return run_gradcheck_cmd(gc_points, gc_seed, gc_tolerance);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
