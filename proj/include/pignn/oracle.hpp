#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "pignn/graph.hpp"
#include "pignn/qubo.hpp"

namespace pignn {

struct ExactSolution {
    double value = 0.0;
    std::vector<uint8_t> assignment;
    uint64_t count_optimal = 0;
};

namespace detail {

constexpr int kExactSolveCap = 24;

inline void check_exact_cap(int n, const char* who) {
    if (n > kExactSolveCap)
        throw std::invalid_argument(std::string(who) + ": n exceeds exhaustive cap of " +
                                    std::to_string(kExactSolveCap));
}

// Visits all 2^n assignments in reflected Gray-code order starting from
// all-zeros, calling on_flip(bit) after each single-bit flip. The caller
// keeps the incremental objective.
template <typename OnFlip>
void gray_scan(int n, OnFlip&& on_flip) {
    const uint64_t total = 1ull << n;
    for (uint64_t k = 1; k < total; ++k) on_flip(std::countr_zero(k));
}

}  // namespace detail

// Exhaustive maximizer of the combinatorial objective. Cut sizes and set
// sizes are maintained incrementally along the Gray-code walk.
inline ExactSolution exact_solve(Problem problem, const Graph& g) {
    const int n = g.node_count();
    detail::check_exact_cap(n, "exact_solve");

    std::vector<uint8_t> x(n, 0);
    int cut = 0, selected = 0, violations = 0;

    ExactSolution best;
    best.value = 0.0;  // all-zeros is feasible for both problems
    best.assignment = x;
    best.count_optimal = 1;

    auto consider = [&](double value, bool feasible) {
        if (!feasible) return;
        if (value > best.value) {
            best.value = value;
            best.assignment = x;
            best.count_optimal = 1;
        } else if (value == best.value) {
            ++best.count_optimal;
        }
    };

    detail::gray_scan(n, [&](int b) {
        if (problem == Problem::MaxCut) {
            for (int j : g.neighbors(b)) cut += (x[j] == x[b]) ? 1 : -1;
            x[b] ^= 1;
            consider(cut, true);
        } else {
            int sel_nbrs = 0;
            for (int j : g.neighbors(b)) sel_nbrs += x[j];
            if (x[b]) {
                --selected;
                violations -= sel_nbrs;
            } else {
                ++selected;
                violations += sel_nbrs;
            }
            x[b] ^= 1;
            consider(selected, violations == 0);
        }
    });
    return best;
}

// Exhaustive minimizer of x^T Q x over binary x.
inline ExactSolution exact_qubo_min(const QuboInstance& q) {
    detail::check_exact_cap(q.n, "exact_qubo_min");

    std::vector<std::vector<std::pair<int, double>>> adj(q.n);
    for (const auto& [i, j, c] : q.offdiag) {
        adj[i].emplace_back(j, c);
        adj[j].emplace_back(i, c);
    }

    std::vector<uint8_t> x(q.n, 0);
    double h = 0.0;

    ExactSolution best;
    best.value = 0.0;
    best.assignment = x;
    best.count_optimal = 1;

    detail::gray_scan(q.n, [&](int b) {
        double delta = q.diag[b];
        for (const auto& [j, c] : adj[b]) delta += x[j] ? c : 0.0;
        h += x[b] ? -delta : delta;
        x[b] ^= 1;
        if (h < best.value) {
            best.value = h;
            best.assignment = x;
            best.count_optimal = 1;
        } else if (h == best.value) {
            ++best.count_optimal;
        }
    });
    return best;
}

// Central finite differences, the reference gradient for all gradient tests.
template <typename F>
std::vector<double> finite_diff_grad(F&& f, std::span<const double> x, double h = 1e-5) {
    std::vector<double> point(x.begin(), x.end());
    std::vector<double> grad(x.size());
    for (size_t i = 0; i < point.size(); ++i) {
        const double saved = point[i];
        point[i] = saved + h;
        const double fp = f(std::span<const double>(point));
        point[i] = saved - h;
        const double fm = f(std::span<const double>(point));
        point[i] = saved;
        grad[i] = (fp - fm) / (2.0 * h);
    }
    return grad;
}

}  // namespace pignn
