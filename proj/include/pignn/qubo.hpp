#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pignn/graph.hpp"
#include "pignn/util.hpp"

namespace pignn {

enum class Problem { MaxCut, MIS };

inline std::string to_string(Problem p) { return p == Problem::MaxCut ? "maxcut" : "mis"; }

inline Problem problem_from_string(const std::string& s) {
    if (s == "maxcut") return Problem::MaxCut;
    if (s == "mis") return Problem::MIS;
    throw std::invalid_argument("unknown problem: " + s);
}

// Fuzzy conjunctions over [0,1]. Product is the algebraic x*y used by the
// plain relaxation; the other two give different loss landscapes while
// agreeing with x*y on binary inputs.
enum class TNorm { Product, Standard, Lukasiewicz };

inline std::string to_string(TNorm t) {
    switch (t) {
        case TNorm::Product: return "product";
        case TNorm::Standard: return "standard";
        case TNorm::Lukasiewicz: return "lukasiewicz";
    }
    return "?";
}

inline double tnorm_apply(TNorm t, double a, double b) {
    switch (t) {
        case TNorm::Product: return a * b;
        case TNorm::Standard: return a < b ? a : b;
        case TNorm::Lukasiewicz: return std::max(a + b - 1.0, 0.0);
    }
    return 0.0;
}

// Sparse symmetric QUBO. Off-diagonal terms are stored once per unordered
// pair with the combined coefficient (Q_ij + Q_ji).
struct QuboInstance {
    struct OffDiag {
        int i;
        int j;  // i < j
        double coeff;
    };

    int n = 0;
    std::vector<double> diag;
    std::vector<OffDiag> offdiag;
    Problem problem = Problem::MaxCut;
    double penalty = 0.0;  // MIS only
};

// MaxCut encoding: H(x) = -(cut size) for every binary x. Each edge {i,j}
// contributes +2 to the pair coefficient and -1 to both diagonals.
inline QuboInstance encode_maxcut(const Graph& g) {
    QuboInstance q;
    q.n = g.node_count();
    q.problem = Problem::MaxCut;
    q.diag.assign(q.n, 0.0);
    q.offdiag.reserve(g.edge_count());
    for (const auto& [u, v] : g.edges()) {
        q.diag[u] -= 1.0;
        q.diag[v] -= 1.0;
        q.offdiag.push_back({u, v, 2.0});
    }
    return q;
}

// MIS encoding: H(x) = -sum_i x_i + penalty * (#edges with both ends
// selected), so feasible minima select maximum independent sets. Any
// penalty > 1 preserves the optima.
inline QuboInstance encode_mis(const Graph& g, double penalty = 2.0) {
    if (!(penalty > 1.0)) throw std::invalid_argument("encode_mis: penalty must be > 1");
    QuboInstance q;
    q.n = g.node_count();
    q.problem = Problem::MIS;
    q.penalty = penalty;
    q.diag.assign(q.n, -1.0);
    q.offdiag.reserve(g.edge_count());
    for (const auto& [u, v] : g.edges()) q.offdiag.push_back({u, v, penalty});
    return q;
}

namespace detail {

inline void check_unit_interval(std::span<const double> x, const char* who) {
    for (double v : x)
        if (!(v >= 0.0 && v <= 1.0))
            throw std::domain_error(std::string(who) + ": value outside [0,1]");
}

}  // namespace detail

// Fuzzy Hamiltonian: sum_i diag_i * (x_i ^ x_i) + sum_{i<j} c_ij * (x_i ^ x_j)
// with ^ the chosen t-norm. Diagonal terms take the t-norm of a value with
// itself: x^2 (product), x (standard), max(2x-1, 0) (Lukasiewicz).
inline double hamiltonian(const QuboInstance& q, std::span<const double> x, TNorm t) {
    if (static_cast<int>(x.size()) != q.n)
        throw std::invalid_argument("hamiltonian: size mismatch");
    detail::check_unit_interval(x, "hamiltonian");
    double h = 0.0;
    for (int i = 0; i < q.n; ++i) h += q.diag[i] * tnorm_apply(t, x[i], x[i]);
    for (const auto& [i, j, c] : q.offdiag) h += c * tnorm_apply(t, x[i], x[j]);
    return h;
}

// Subgradient of the fuzzy Hamiltonian. Conventions at the kinks: the min
// term routes its coefficient to the strictly smaller argument (split
// equally on ties); the Lukasiewicz term contributes nothing on the
// x_i + x_j <= 1 plateau, including the boundary.
inline std::vector<double> hamiltonian_grad(const QuboInstance& q, std::span<const double> x,
                                            TNorm t) {
    if (static_cast<int>(x.size()) != q.n)
        throw std::invalid_argument("hamiltonian_grad: size mismatch");
    detail::check_unit_interval(x, "hamiltonian_grad");
    std::vector<double> grad(q.n, 0.0);
    for (int i = 0; i < q.n; ++i) {
        switch (t) {
            case TNorm::Product: grad[i] += q.diag[i] * 2.0 * x[i]; break;
            case TNorm::Standard: grad[i] += q.diag[i]; break;
            case TNorm::Lukasiewicz:
                if (x[i] > 0.5) grad[i] += q.diag[i] * 2.0;
                break;
        }
    }
    for (const auto& [i, j, c] : q.offdiag) {
        switch (t) {
            case TNorm::Product:
                grad[i] += c * x[j];
                grad[j] += c * x[i];
                break;
            case TNorm::Standard:
                if (x[i] < x[j]) {
                    grad[i] += c;
                } else if (x[j] < x[i]) {
                    grad[j] += c;
                } else {
                    grad[i] += 0.5 * c;
                    grad[j] += 0.5 * c;
                }
                break;
            case TNorm::Lukasiewicz:
                if (x[i] + x[j] > 1.0) {
                    grad[i] += c;
                    grad[j] += c;
                }
                break;
        }
    }
    return grad;
}

// Score a binary assignment against the original combinatorial objective.
// MaxCut: (#cut edges, true). MIS: (#selected, true) when independent,
// (0, false) otherwise.
inline std::pair<double, bool> objective_value(Problem problem, const Graph& g,
                                               std::span<const uint8_t> xb) {
    if (static_cast<int>(xb.size()) != g.node_count())
        throw std::invalid_argument("objective_value: size mismatch");
    if (problem == Problem::MaxCut) {
        int cut = 0;
        for (const auto& [u, v] : g.edges()) cut += xb[u] != xb[v];
        return {static_cast<double>(cut), true};
    }
    for (const auto& [u, v] : g.edges())
        if (xb[u] && xb[v]) return {0.0, false};
    int selected = 0;
    for (uint8_t b : xb) selected += b;
    return {static_cast<double>(selected), true};
}

enum class Regularizer { None, L1, BinaryEntropy };

// H(x) plus alpha * P(x). Binary entropy is in bits and uses the limit
// convention 0*log(0) = 0, so exactly-binary values incur no penalty.
inline double regularized_loss(const QuboInstance& q, std::span<const double> x, TNorm t,
                               Regularizer reg, double alpha) {
    if (alpha < 0.0) throw std::invalid_argument("regularized_loss: alpha must be >= 0");
    double h = hamiltonian(q, x, t);
    if (reg == Regularizer::None || alpha == 0.0) return h;
    double p = 0.0;
    if (reg == Regularizer::L1) {
        for (double v : x) p += std::abs(v);
    } else {
        for (double v : x) {
            if (v > 0.0) p -= v * std::log2(v);
            if (v < 1.0) p -= (1.0 - v) * std::log2(1.0 - v);
        }
    }
    return h + alpha * p;
}

// Text format: "n", nonzero diagonal lines "i i c", then pair lines "i j c".
inline void write_qubo(const QuboInstance& q, std::ostream& out) {
    out << q.n << '\n';
    for (int i = 0; i < q.n; ++i)
        if (q.diag[i] != 0.0) out << i << ' ' << i << ' ' << fmt_double(q.diag[i]) << '\n';
    for (const auto& [i, j, c] : q.offdiag)
        out << i << ' ' << j << ' ' << fmt_double(c) << '\n';
}

inline QuboInstance read_qubo(std::istream& in, Problem problem = Problem::MaxCut,
                              double penalty = 0.0) {
    QuboInstance q;
    q.problem = problem;
    q.penalty = penalty;
    if (!(in >> q.n) || q.n < 0) throw std::runtime_error("qubo: bad variable count");
    q.diag.assign(q.n, 0.0);
    int i = 0, j = 0;
    double c = 0.0;
    while (in >> i >> j >> c) {
        if (i < 0 || j < 0 || i >= q.n || j >= q.n || i > j)
            throw std::runtime_error("qubo: bad term indices");
        if (i == j)
            q.diag[i] = c;
        else
            q.offdiag.push_back({i, j, c});
    }
    return q;
}

}  // namespace pignn
