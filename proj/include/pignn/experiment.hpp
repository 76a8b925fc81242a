#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "pignn/graph.hpp"
#include "pignn/metrics.hpp"
#include "pignn/qubo.hpp"
#include "pignn/trainer.hpp"

namespace pignn {

struct ExperimentConfig {
    Problem problem = Problem::MaxCut;
    std::vector<int> sizes = {100};
    std::vector<int> degrees = {3, 5, 10, 20, 30, 40, 50};
    int graphs_per_setting = 5;
    int n_seeds = 5;
    std::vector<std::string> variants;  // empty = all eight
    TrainConfig train;
    double mis_penalty = 2.0;
    std::string out_dir = "out";
    int threads = 1;
    uint64_t master_seed = 1;

    ExperimentConfig() {
        train.max_epochs = 20000;  // desk-scale default, overridable up to paper scale
        train.trace = false;
    }

    std::vector<VariantSpec> variant_specs() const {
        if (variants.empty()) return all_variants();
        std::vector<VariantSpec> specs;
        specs.reserve(variants.size());
        for (const auto& name : variants) specs.push_back(variant_from_name(name));
        return specs;
    }

    void validate() const {
        if (sizes.empty() || degrees.empty())
            throw std::invalid_argument("config: empty size or degree list");
        if (graphs_per_setting < 1 || n_seeds < 1 || threads < 1)
            throw std::invalid_argument("config: counts must be >= 1");
        for (int n : sizes)
            for (int d : degrees) {
                if (!(0 < d && d < n))
                    throw std::invalid_argument("config: need 0 < d < n for n=" +
                                                std::to_string(n) + " d=" + std::to_string(d));
                if ((static_cast<int64_t>(n) * d) % 2 != 0)
                    throw std::invalid_argument("config: n*d must be even for n=" +
                                                std::to_string(n) + " d=" + std::to_string(d));
            }
        train.validate();
    }
};

struct ManifestEntry {
    std::string problem;
    int n = 0;
    int d = 0;
    int graph_id = 0;
    std::string path;  // relative to the manifest directory
    uint64_t seed = 0;
};

inline constexpr const char* kManifestHeader = "problem,n,d,graph_id,path,seed";

inline std::string instance_key(const std::string& problem, int n, int d, int graph_id) {
    return problem + "|n" + std::to_string(n) + "|d" + std::to_string(d) + "|g" +
           std::to_string(graph_id);
}

inline void write_manifest(std::span<const ManifestEntry> entries, std::ostream& out) {
    out << kManifestHeader << '\n';
    for (const auto& e : entries)
        out << e.problem << ',' << e.n << ',' << e.d << ',' << e.graph_id << ',' << e.path << ','
            << e.seed << '\n';
}

inline std::vector<ManifestEntry> read_manifest(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kManifestHeader)
        throw std::runtime_error("manifest, line 1: bad header");
    std::vector<ManifestEntry> entries;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ss(line);
        ManifestEntry e;
        std::string field;
        auto next = [&] {
            if (!std::getline(ss, field, ','))
                throw std::runtime_error("manifest, line " + std::to_string(line_no) +
                                         ": missing field");
            return field;
        };
        e.problem = next();
        e.n = std::stoi(next());
        e.d = std::stoi(next());
        e.graph_id = std::stoi(next());
        e.path = next();
        e.seed = std::stoull(next());
        entries.push_back(std::move(e));
    }
    return entries;
}

// Generate the instance suite: one edge-list file per (n, d, graph index)
// plus a manifest. Byte-identical across reruns with the same master seed.
inline std::filesystem::path cmd_generate(const ExperimentConfig& config) {
    config.validate();
    namespace fs = std::filesystem;
    const fs::path out(config.out_dir);
    const std::string problem = to_string(config.problem);

    std::error_code ec;
    fs::create_directories(out / "instances", ec);
    if (ec)
        throw std::runtime_error("generate: cannot create " + (out / "instances").string() +
                                 ": " + ec.message());

    std::vector<ManifestEntry> entries;
    for (int n : config.sizes)
        for (int d : config.degrees)
            for (int gid = 0; gid < config.graphs_per_setting; ++gid) {
                ManifestEntry e;
                e.problem = problem;
                e.n = n;
                e.d = d;
                e.graph_id = gid;
                e.seed = derive_seed(config.master_seed, "graph|" + instance_key(problem, n, d, gid));
                e.path = "instances/" + problem + "_n" + std::to_string(n) + "_d" +
                         std::to_string(d) + "_g" + std::to_string(gid) + ".edges";
                const Graph g = generate_regular(n, d, e.seed);
                std::ofstream f(out / e.path, std::ios::binary);
                if (!f) throw std::runtime_error("generate: cannot write " + (out / e.path).string());
                write_edgelist(g, f);
                entries.push_back(std::move(e));
            }

    const fs::path manifest = out / "manifest.csv";
    std::ofstream f(manifest, std::ios::binary);
    if (!f) throw std::runtime_error("generate: cannot write " + manifest.string());
    write_manifest(entries, f);
    return manifest;
}

// Run the full grid described by a manifest. Per-run failures are recorded
// in the results table; they never abort the grid.
inline std::filesystem::path cmd_run(const ExperimentConfig& config,
                                     const std::filesystem::path& manifest_path) {
    config.validate();
    namespace fs = std::filesystem;

    std::ifstream mf(manifest_path);
    if (!mf) throw std::runtime_error("run: cannot read " + manifest_path.string());
    const std::vector<ManifestEntry> manifest = read_manifest(mf);
    const fs::path base = manifest_path.parent_path();
    const fs::path out(config.out_dir);
    const std::vector<VariantSpec> specs = config.variant_specs();

    std::error_code ec;
    fs::create_directories(out, ec);
    if (config.train.trace) fs::create_directories(out / "traces", ec);

    std::vector<ResultRow> rows;
    rows.reserve(manifest.size() * specs.size() * config.n_seeds);
    for (const auto& inst : manifest) {
        std::ifstream gf(base / inst.path);
        if (!gf) throw std::runtime_error("run: cannot read " + (base / inst.path).string());
        const Graph g = read_edgelist(gf);
        const Problem problem = problem_from_string(inst.problem);
        const QuboInstance q = problem == Problem::MaxCut
                                   ? encode_maxcut(g)
                                   : encode_mis(g, config.mis_penalty);
        const std::string key = instance_key(inst.problem, inst.n, inst.d, inst.graph_id);
        const uint64_t base_seed = derive_seed(config.master_seed, "runs|" + key);

        const auto entries =
            run_portfolio(g, q, specs, config.n_seeds, config.train, base_seed, config.threads);
        for (const auto& e : entries) {
            ResultRow row;
            row.problem = inst.problem;
            row.n = inst.n;
            row.d = inst.d;
            row.graph_id = inst.graph_id;
            row.variant = e.variant;
            row.seed = e.seed_index;
            row.objective = e.result.objective;
            row.feasible = e.result.feasible;
            rows.push_back(std::move(row));

            if (config.train.trace) {
                const fs::path trace = out / "traces" /
                                       (inst.problem + "_n" + std::to_string(inst.n) + "_d" +
                                        std::to_string(inst.d) + "_g" +
                                        std::to_string(inst.graph_id) + "_" + e.variant + "_s" +
                                        std::to_string(e.seed_index) + ".csv");
                std::ofstream tf(trace, std::ios::binary);
                if (!tf) throw std::runtime_error("run: cannot write " + trace.string());
                write_trace_csv(e.result, tf);
            }
        }
    }

    const fs::path results = out / "results.csv";
    std::ofstream rf(results, std::ios::binary);
    if (!rf) throw std::runtime_error("run: cannot write " + results.string());
    write_results_csv(rows, rf);
    return results;
}

namespace detail {

// Canonical portfolio order first, unknown variant names after, alphabetical.
inline std::vector<std::string> order_variants(const std::set<std::string>& names) {
    std::vector<std::string> ordered;
    for (const auto& v : all_variants())
        if (names.count(v.name)) ordered.push_back(v.name);
    for (const auto& name : names)
        if (std::find(ordered.begin(), ordered.end(), name) == ordered.end())
            ordered.push_back(name);
    return ordered;
}

}  // namespace detail

// Aggregate per-run rows into one row per (problem, n, d, variant) with BoN,
// Avg and their reciprocal ranks. Row order of the input is irrelevant.
inline std::vector<AggregateRow> aggregate_results(std::span<const ResultRow> rows,
                                                   TieScheme scheme = TieScheme::Competition) {
    using SettingKey = std::tuple<std::string, int, int>;
    std::map<SettingKey, std::vector<const ResultRow*>> groups;
    for (const auto& r : rows) groups[{r.problem, r.n, r.d}].push_back(&r);

    std::vector<AggregateRow> out;
    for (const auto& [key, group] : groups) {
        std::set<int> graph_ids, seeds;
        std::set<std::string> names;
        for (const ResultRow* r : group) {
            graph_ids.insert(r->graph_id);
            seeds.insert(r->seed);
            names.insert(r->variant);
        }
        const std::vector<std::string> variants = detail::order_variants(names);
        std::map<int, int> graph_index, seed_index;
        int gi = 0, si = 0;
        for (int g : graph_ids) graph_index[g] = gi++;
        for (int s : seeds) seed_index[s] = si++;
        std::map<std::string, int> variant_index;
        for (size_t v = 0; v < variants.size(); ++v) variant_index[variants[v]] = static_cast<int>(v);

        ResultTable table(static_cast<int>(graph_ids.size()), variants,
                          static_cast<int>(seeds.size()));
        std::set<std::tuple<int, int, int>> filled;
        for (const ResultRow* r : group) {
            const auto cell = std::make_tuple(graph_index[r->graph_id],
                                              variant_index[r->variant], seed_index[r->seed]);
            if (!filled.insert(cell).second)
                throw std::runtime_error("report: duplicate row for " + r->problem + " n=" +
                                         std::to_string(r->n) + " d=" + std::to_string(r->d) +
                                         " graph=" + std::to_string(r->graph_id) + " variant=" +
                                         r->variant + " seed=" + std::to_string(r->seed));
            // nullification: infeasible runs count as the empty assignment
            table.set(std::get<0>(cell), std::get<1>(cell), std::get<2>(cell),
                      r->feasible ? r->objective : 0.0);
        }
        if (filled.size() != graph_ids.size() * variants.size() * seeds.size())
            throw std::runtime_error("report: incomplete grid for " + std::get<0>(key) + " n=" +
                                     std::to_string(std::get<1>(key)) + " d=" +
                                     std::to_string(std::get<2>(key)));

        const std::vector<double> rr_bon = mrr(table, Aggregator::BoN, scheme);
        const std::vector<double> rr_avg = mrr(table, Aggregator::Avg, scheme);
        for (size_t v = 0; v < variants.size(); ++v) {
            AggregateRow row;
            row.problem = std::get<0>(key);
            row.n = std::get<1>(key);
            row.d = std::get<2>(key);
            row.variant = variants[v];
            double bon = 0.0, mean = 0.0;
            for (int g = 0; g < table.n_graphs(); ++g) {
                bon += table.aggregate(g, static_cast<int>(v), Aggregator::BoN);
                mean += table.aggregate(g, static_cast<int>(v), Aggregator::Avg);
            }
            row.bon = bon / table.n_graphs();
            row.avg = mean / table.n_graphs();
            row.rr_bon = rr_bon[v];
            row.rr_avg = rr_avg[v];
            out.push_back(std::move(row));
        }
    }
    return out;
}

inline std::filesystem::path cmd_report(const std::filesystem::path& results_path,
                                        const std::filesystem::path& out_path,
                                        TieScheme scheme = TieScheme::Competition) {
    std::ifstream in(results_path);
    if (!in) throw std::runtime_error("report: cannot read " + results_path.string());
    const std::vector<ResultRow> rows = read_results_csv(in);
    const std::vector<AggregateRow> agg = aggregate_results(rows, scheme);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("report: cannot write " + out_path.string());
    write_aggregate_csv(agg, out);
    return out_path;
}

}  // namespace pignn
