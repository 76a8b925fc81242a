#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pignn/util.hpp"

namespace pignn {

// Threshold at 0.5, ties to 1. Truncation would nullify everything short of
// an exact 1.0, which no sigmoid output ever reaches.
inline std::vector<uint8_t> round_assignment(std::span<const double> a_post) {
    std::vector<uint8_t> out(a_post.size());
    for (size_t i = 0; i < a_post.size(); ++i) {
        if (!(a_post[i] >= 0.0 && a_post[i] <= 1.0))
            throw std::domain_error("round_assignment: value outside [0,1]");
        out[i] = a_post[i] >= 0.5 ? 1 : 0;
    }
    return out;
}

inline double best_of_n(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("best_of_n: empty input");
    return *std::max_element(values.begin(), values.end());
}

inline double avg(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("avg: empty input");
    return std::accumulate(values.begin(), values.end(), 0.0) / values.size();
}

enum class Aggregator { BoN, Avg };

// Competition gives every tied variant the best rank of the tied block;
// BlockAverage gives each the mean reciprocal of the ranks the block spans.
enum class TieScheme { Competition, BlockAverage };

// Per-run objective values for one (problem, n, d) setting, addressed by
// (graph, variant, seed). Infeasible runs must already carry 0.
class ResultTable {
public:
    ResultTable(int n_graphs, std::vector<std::string> variants, int n_seeds)
        : n_graphs_(n_graphs),
          variants_(std::move(variants)),
          n_seeds_(n_seeds),
          values_(static_cast<size_t>(n_graphs) * variants_.size() * n_seeds,
                  kUnset) {
        if (n_graphs < 1 || variants_.empty() || n_seeds < 1)
            throw std::invalid_argument("result table: empty dimension");
    }

    void set(int graph, int variant, int seed, double value) {
        values_.at(index(graph, variant, seed)) = value;
    }

    double get(int graph, int variant, int seed) const {
        const double v = values_.at(index(graph, variant, seed));
        if (v == kUnset) throw std::runtime_error("result table: incomplete grid");
        return v;
    }

    int n_graphs() const { return n_graphs_; }
    int n_seeds() const { return n_seeds_; }
    const std::vector<std::string>& variants() const { return variants_; }

    // Seed aggregation for one (graph, variant) cell.
    double aggregate(int graph, int variant, Aggregator agg) const {
        std::vector<double> vals(n_seeds_);
        for (int s = 0; s < n_seeds_; ++s) vals[s] = get(graph, variant, s);
        return agg == Aggregator::BoN ? best_of_n(vals) : avg(vals);
    }

private:
    static constexpr double kUnset = -1e308;

    size_t index(int graph, int variant, int seed) const {
        if (graph < 0 || graph >= n_graphs_ || variant < 0 ||
            variant >= static_cast<int>(variants_.size()) || seed < 0 || seed >= n_seeds_)
            throw std::out_of_range("result table: bad key");
        return (static_cast<size_t>(graph) * variants_.size() + variant) * n_seeds_ + seed;
    }

    int n_graphs_;
    std::vector<std::string> variants_;
    int n_seeds_;
    std::vector<double> values_;
};

namespace detail {

// Reciprocal rank of every variant on one graph, larger aggregate = better.
inline std::vector<double> reciprocal_ranks(std::span<const double> scores, TieScheme scheme) {
    const size_t q = scores.size();
    std::vector<size_t> order(q);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return scores[a] > scores[b]; });

    std::vector<double> rr(q, 0.0);
    size_t pos = 0;
    while (pos < q) {
        size_t end = pos;
        while (end < q && scores[order[end]] == scores[order[pos]]) ++end;
        // tied block occupies ranks pos+1 .. end
        double value = 0.0;
        if (scheme == TieScheme::Competition) {
            value = 1.0 / static_cast<double>(pos + 1);
        } else {
            for (size_t r = pos + 1; r <= end; ++r) value += 1.0 / static_cast<double>(r);
            value /= static_cast<double>(end - pos);
        }
        for (size_t k = pos; k < end; ++k) rr[order[k]] = value;
        pos = end;
    }
    return rr;
}

}  // namespace detail

// Mean reciprocal rank per variant: rank the variants on every graph by the
// seed-aggregated value, then average 1/rank over graphs.
inline std::vector<double> mrr(const ResultTable& table, Aggregator agg,
                               TieScheme scheme = TieScheme::Competition) {
    const size_t q = table.variants().size();
    std::vector<double> out(q, 0.0);
    for (int g = 0; g < table.n_graphs(); ++g) {
        std::vector<double> scores(q);
        for (size_t v = 0; v < q; ++v)
            scores[v] = table.aggregate(g, static_cast<int>(v), agg);
        const auto rr = detail::reciprocal_ranks(scores, scheme);
        for (size_t v = 0; v < q; ++v) out[v] += rr[v];
    }
    for (double& v : out) v /= table.n_graphs();
    return out;
}

// One row of the per-run results CSV.
struct ResultRow {
    std::string problem;
    int n = 0;
    int d = 0;
    int graph_id = 0;
    std::string variant;
    int seed = 0;
    double objective = 0.0;
    bool feasible = true;
};

inline constexpr const char* kResultsHeader = "problem,n,d,graph_id,variant,seed,objective,feasible";

inline void write_results_csv(std::span<const ResultRow> rows, std::ostream& out) {
    out << kResultsHeader << '\n';
    for (const auto& r : rows)
        out << r.problem << ',' << r.n << ',' << r.d << ',' << r.graph_id << ',' << r.variant
            << ',' << r.seed << ',' << fmt_double(r.objective) << ',' << (r.feasible ? 1 : 0)
            << '\n';
}

inline std::vector<ResultRow> read_results_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kResultsHeader)
        throw std::runtime_error("results csv, line 1: bad header");
    std::vector<ResultRow> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ss(line);
        ResultRow r;
        std::string field;
        auto next = [&](const char* what) {
            if (!std::getline(ss, field, ','))
                throw std::runtime_error("results csv, line " + std::to_string(line_no) +
                                         ": missing " + what);
            return field;
        };
        try {
            r.problem = next("problem");
            r.n = std::stoi(next("n"));
            r.d = std::stoi(next("d"));
            r.graph_id = std::stoi(next("graph_id"));
            r.variant = next("variant");
            r.seed = std::stoi(next("seed"));
            r.objective = std::stod(next("objective"));
            r.feasible = std::stoi(next("feasible")) != 0;
        } catch (const std::exception& e) {
            throw std::runtime_error("results csv, line " + std::to_string(line_no) + ": " +
                                     e.what());
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

// One row of the aggregate CSV emitted by the report step.
struct AggregateRow {
    std::string problem;
    int n = 0;
    int d = 0;
    std::string variant;
    double bon = 0.0;
    double rr_bon = 0.0;
    double avg = 0.0;
    double rr_avg = 0.0;
};

inline constexpr const char* kAggregateHeader = "problem,n,d,variant,bon,rr_bon,avg,rr_avg";

inline void write_aggregate_csv(std::span<const AggregateRow> rows, std::ostream& out) {
    out << kAggregateHeader << '\n';
    for (const auto& r : rows)
        out << r.problem << ',' << r.n << ',' << r.d << ',' << r.variant << ','
            << fmt_double(r.bon) << ',' << fmt_double(r.rr_bon) << ',' << fmt_double(r.avg)
            << ',' << fmt_double(r.rr_avg) << '\n';
}

}  // namespace pignn
