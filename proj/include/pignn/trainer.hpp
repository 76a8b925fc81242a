#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "pignn/gnn.hpp"
#include "pignn/graph.hpp"
#include "pignn/metrics.hpp"
#include "pignn/qubo.hpp"
#include "pignn/util.hpp"

namespace pignn {

enum class ScheduleKind { Constant, Linear, Logarithmic, Exponential };

inline std::string to_string(ScheduleKind k) {
    switch (k) {
        case ScheduleKind::Constant: return "constant";
        case ScheduleKind::Linear: return "linear";
        case ScheduleKind::Logarithmic: return "logarithmic";
        case ScheduleKind::Exponential: return "exponential";
    }
    return "?";
}

// Inverse-temperature schedules, re-anchored so every schedule starts at 1
// and stays within [1, max_epochs].
inline double inv_temp_schedule(ScheduleKind kind, int64_t epoch, int64_t max_epochs) {
    if (epoch < 1 || epoch > max_epochs)
        throw std::invalid_argument("inv_temp_schedule: epoch out of range");
    double v = 1.0;
    switch (kind) {
        case ScheduleKind::Constant: v = 1.0; break;
        case ScheduleKind::Linear: v = static_cast<double>(epoch); break;
        case ScheduleKind::Logarithmic: v = std::log2(static_cast<double>(epoch) + 1.0); break;
        case ScheduleKind::Exponential:
            v = std::exp2(static_cast<double>(epoch) * std::log2(static_cast<double>(max_epochs)) /
                          static_cast<double>(max_epochs));
            break;
    }
    return std::clamp(v, 1.0, static_cast<double>(max_epochs));
}

// The portfolio of architectures: the plain relaxation, three annealed
// sigmoids, two hard binarizations, and two alternative fuzzy losses.
struct VariantSpec {
    std::string name;
    ActivationVariant activation;
    TNorm tnorm = TNorm::Product;
    ScheduleKind schedule = ScheduleKind::Constant;
};

inline std::vector<VariantSpec> all_variants() {
    return {
        {"baseline", {ActivationKind::Sigmoid}, TNorm::Product, ScheduleKind::Constant},
        {"temp-lin", {ActivationKind::TemperedSigmoid}, TNorm::Product, ScheduleKind::Linear},
        {"temp-log", {ActivationKind::TemperedSigmoid}, TNorm::Product, ScheduleKind::Logarithmic},
        {"temp-exp", {ActivationKind::TemperedSigmoid}, TNorm::Product, ScheduleKind::Exponential},
        {"bin-ste", {ActivationKind::StepSte}, TNorm::Product, ScheduleKind::Constant},
        {"bin-sig", {ActivationKind::StepSigmoidBackward}, TNorm::Product, ScheduleKind::Constant},
        {"fuzzy-std", {ActivationKind::Sigmoid}, TNorm::Standard, ScheduleKind::Constant},
        {"fuzzy-luk", {ActivationKind::Sigmoid}, TNorm::Lukasiewicz, ScheduleKind::Constant},
    };
}

inline VariantSpec variant_from_name(const std::string& name) {
    for (auto& v : all_variants())
        if (v.name == name) return v;
    throw std::invalid_argument("unknown variant: " + name);
}

struct TrainConfig {
    double lr = 1e-4;
    int64_t max_epochs = 100000;
    double es_tolerance = 1e-4;
    int64_t es_patience = 1000;
    int trace_bins = 100;
    int64_t trace_every = 100;
    bool trace = true;
    ModelOverrides model;  // 0 = derive dimensions from the graph size

    void validate() const {
        if (lr <= 0 || max_epochs <= 0 || es_tolerance <= 0 || es_patience <= 0 ||
            trace_bins < 2 || trace_every <= 0)
            throw std::invalid_argument("train config: non-positive field");
        if (es_patience > max_epochs)
            throw std::invalid_argument("train config: patience exceeds max_epochs");
    }
};

struct Histogram {
    int64_t epoch = 0;
    double lo = 0.0;
    double hi = 1.0;
    std::vector<int64_t> counts;

    bool operator==(const Histogram&) const = default;
};

inline Histogram record_histogram(std::span<const double> values, int bins, double lo, double hi) {
    if (bins < 2) throw std::invalid_argument("record_histogram: need bins >= 2");
    if (!(lo < hi)) throw std::invalid_argument("record_histogram: empty range");
    Histogram h;
    h.lo = lo;
    h.hi = hi;
    h.counts.assign(bins, 0);
    const double scale = bins / (hi - lo);
    for (double v : values) {
        int idx = static_cast<int>(std::floor((v - lo) * scale));
        idx = std::clamp(idx, 0, bins - 1);
        ++h.counts[idx];
    }
    return h;
}

inline double histogram_mass(const Histogram& h) {
    double total = 0.0;
    for (int64_t c : h.counts) total += static_cast<double>(c);
    return total;
}

// Fraction of recorded values in bins lying entirely at or above x0.
inline double histogram_fraction_at_least(const Histogram& h, double x0) {
    const double width = (h.hi - h.lo) / h.counts.size();
    double hits = 0.0;
    for (size_t b = 0; b < h.counts.size(); ++b)
        if (h.lo + width * b >= x0) hits += static_cast<double>(h.counts[b]);
    return hits / histogram_mass(h);
}

// Mean of the recorded values approximated from bin centers.
inline double histogram_mean(const Histogram& h) {
    const double width = (h.hi - h.lo) / h.counts.size();
    double sum = 0.0;
    for (size_t b = 0; b < h.counts.size(); ++b)
        sum += static_cast<double>(h.counts[b]) * (h.lo + width * (b + 0.5));
    return sum / histogram_mass(h);
}

// Percentile (0..100) of |value| approximated from bin centers.
inline double histogram_abs_percentile(const Histogram& h, double pct) {
    const double width = (h.hi - h.lo) / h.counts.size();
    std::vector<std::pair<double, int64_t>> abs_bins;
    abs_bins.reserve(h.counts.size());
    for (size_t b = 0; b < h.counts.size(); ++b)
        abs_bins.emplace_back(std::abs(h.lo + width * (b + 0.5)), h.counts[b]);
    std::sort(abs_bins.begin(), abs_bins.end());
    const double target = histogram_mass(h) * pct / 100.0;
    double seen = 0.0;
    for (const auto& [center, count] : abs_bins) {
        seen += static_cast<double>(count);
        if (seen >= target) return center;
    }
    return abs_bins.empty() ? 0.0 : abs_bins.back().first;
}

struct RunResult {
    std::vector<uint8_t> assignment;
    double objective = 0.0;
    bool feasible = true;
    bool failed = false;
    double relaxed_loss_final = 0.0;
    int64_t epochs_run = 0;
    std::vector<Histogram> pre_hist;
    std::vector<Histogram> post_hist;
    std::string diagnostic;

    bool operator==(const RunResult&) const = default;
};

// Full-batch training of one model on one instance. Early stopping measures
// the relaxed loss against the best value seen so far; the first epoch sets
// the baseline, so a flat loss stops after exactly es_patience epochs.
inline RunResult train(const Graph& g, const QuboInstance& q, const VariantSpec& variant,
                       const TrainConfig& config, uint64_t seed) {
    config.validate();
    if (q.n != g.node_count()) throw std::invalid_argument("train: instance/graph mismatch");

    const Matrix adjacency = normalized_adjacency(g);
    Model model = init_model(g.node_count(), seed, config.model, variant.activation);
    AdamState opt;

    RunResult res;
    double best = std::numeric_limits<double>::infinity();
    int64_t streak = 0;
    ForwardResult fwd;

    for (int64_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        const double inv_temp = inv_temp_schedule(variant.schedule, epoch, config.max_epochs);
        fwd = forward(model, adjacency, inv_temp);
        const double loss = hamiltonian(q, fwd.a_post, variant.tnorm);
        res.epochs_run = epoch;
        res.relaxed_loss_final = loss;

        if (!std::isfinite(loss)) {
            res.failed = true;
            res.diagnostic = "non-finite loss at epoch " + std::to_string(epoch);
            res.assignment.assign(g.node_count(), 0);
            res.objective = 0.0;
            res.feasible = true;
            return res;
        }

        if (epoch == 1) {
            best = loss;
            streak = 1;
        } else if (best - loss > config.es_tolerance) {
            best = loss;
            streak = 0;
        } else {
            ++streak;
        }
        const bool stopping = streak >= config.es_patience || epoch == config.max_epochs;

        if (config.trace && (epoch == 1 || epoch % config.trace_every == 0 || stopping)) {
            double max_abs = 0.0;
            for (double v : fwd.a_pre) max_abs = std::max(max_abs, std::abs(v));
            const double r = std::max(1.0, max_abs);
            Histogram pre = record_histogram(fwd.a_pre, config.trace_bins, -r, r);
            Histogram post = record_histogram(fwd.a_post, config.trace_bins, 0.0, 1.0);
            pre.epoch = post.epoch = epoch;
            if (res.pre_hist.empty() || res.pre_hist.back().epoch != epoch) {
                res.pre_hist.push_back(std::move(pre));
                res.post_hist.push_back(std::move(post));
            }
        }
        if (stopping) break;

        const std::vector<double> dl = hamiltonian_grad(q, fwd.a_post, variant.tnorm);
        const Gradients grads = backward(model, adjacency, fwd.cache, dl);
        adam_step(model, grads, opt, config.lr);
    }

    res.assignment = round_assignment(fwd.a_post);
    auto [value, feasible] = objective_value(q.problem, g, res.assignment);
    res.objective = value;
    res.feasible = feasible;
    return res;
}

struct PortfolioEntry {
    std::string variant;
    int seed_index = 0;
    uint64_t seed = 0;
    RunResult result;
};

// Seed for one run, stable under reordering or extending the variant list.
inline uint64_t derive_seed(uint64_t root, std::string_view tag) {
    return fnv1a64(tag, fnv1a64(std::to_string(root)));
}

inline uint64_t run_seed(uint64_t base_seed, const std::string& variant_name, int seed_index) {
    return derive_seed(base_seed, "run|" + variant_name + "|" + std::to_string(seed_index));
}

// Independent runs over variants x seeds. Workers pull tasks from a shared
// counter and write into disjoint slots, so the table matches sequential
// execution regardless of thread count.
inline std::vector<PortfolioEntry> run_portfolio(const Graph& g, const QuboInstance& q,
                                                 std::span<const VariantSpec> variants,
                                                 int n_seeds, const TrainConfig& config,
                                                 uint64_t base_seed = 0, int threads = 1) {
    if (n_seeds < 1) throw std::invalid_argument("run_portfolio: need n_seeds >= 1");
    std::vector<PortfolioEntry> entries;
    entries.reserve(variants.size() * n_seeds);
    for (const auto& v : variants)
        for (int s = 0; s < n_seeds; ++s)
            entries.push_back({v.name, s, run_seed(base_seed, v.name, s), {}});

    auto run_one = [&](size_t idx) {
        const VariantSpec& variant = variants[idx / n_seeds];
        PortfolioEntry& e = entries[idx];
        try {
            e.result = train(g, q, variant, config, e.seed);
        } catch (const std::exception& ex) {
            e.result = RunResult{};
            e.result.failed = true;
            e.result.diagnostic = ex.what();
            e.result.assignment.assign(g.node_count(), 0);
        }
    };

    if (threads <= 1) {
        for (size_t i = 0; i < entries.size(); ++i) run_one(i);
    } else {
        std::atomic<size_t> next{0};
        auto worker = [&] {
            for (size_t i = next.fetch_add(1); i < entries.size(); i = next.fetch_add(1))
                run_one(i);
        };
        std::vector<std::thread> pool;
        const int count = std::min<int>(threads, static_cast<int>(entries.size()));
        pool.reserve(count);
        for (int t = 0; t < count; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return entries;
}

// Trace file schema: epoch,kind,bin_lo,bin_hi,count.
inline void write_trace_csv(const RunResult& res, std::ostream& out) {
    out << "epoch,kind,bin_lo,bin_hi,count\n";
    auto dump = [&out](const std::vector<Histogram>& hists, const char* kind) {
        for (const auto& h : hists) {
            const double width = (h.hi - h.lo) / h.counts.size();
            for (size_t b = 0; b < h.counts.size(); ++b)
                out << h.epoch << ',' << kind << ',' << fmt_double(h.lo + width * b) << ','
                    << fmt_double(h.lo + width * (b + 1)) << ',' << h.counts[b] << '\n';
        }
    };
    dump(res.pre_hist, "pre");
    dump(res.post_hist, "post");
}

}  // namespace pignn
