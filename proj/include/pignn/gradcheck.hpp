#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pignn/gnn.hpp"
#include "pignn/graph.hpp"
#include "pignn/oracle.hpp"
#include "pignn/qubo.hpp"
#include "pignn/trainer.hpp"

namespace pignn {

namespace detail {

inline std::vector<double> flatten_params(const Model& m) {
    std::vector<double> theta;
    theta.reserve(m.embeddings.data.size() + m.w1.data.size() + m.w2.data.size());
    for (const Matrix* t : {&m.embeddings, &m.w1, &m.w2})
        theta.insert(theta.end(), t->data.begin(), t->data.end());
    return theta;
}

inline void unflatten_params(std::span<const double> theta, Model& m) {
    size_t pos = 0;
    for (Matrix* t : {&m.embeddings, &m.w1, &m.w2}) {
        std::copy(theta.begin() + pos, theta.begin() + pos + t->data.size(), t->data.begin());
        pos += t->data.size();
    }
}

inline std::vector<double> flatten_grads(const Gradients& g) {
    std::vector<double> flat;
    for (const Matrix* t : {&g.embeddings, &g.w1, &g.w2})
        flat.insert(flat.end(), t->data.begin(), t->data.end());
    return flat;
}

}  // namespace detail

// The loss whose gradient the backward pass is expected to produce. Smooth
// variants differentiate the true composition; step variants differentiate
// the surrogate composition (clip or sigmoid in place of the step), which is
// the mismatch the straight-through scheme deliberately introduces.
inline std::vector<double> surrogate_post(const ActivationVariant& act,
                                          std::span<const double> a_pre, double inv_temp) {
    std::vector<double> x(a_pre.size());
    for (size_t i = 0; i < a_pre.size(); ++i) {
        switch (act.kind) {
            case ActivationKind::Sigmoid: x[i] = sigmoid(a_pre[i]); break;
            case ActivationKind::TemperedSigmoid: x[i] = sigmoid(a_pre[i] * inv_temp); break;
            case ActivationKind::StepSte:
                x[i] = std::clamp(a_pre[i], act.lo, act.hi);
                break;
            case ActivationKind::StepSigmoidBackward: x[i] = sigmoid(a_pre[i]); break;
        }
    }
    return x;
}

struct GradCheckPoint {
    double max_err = 0.0;   // max over components of |g - g_fd| / max(1, |g|, |g_fd|)
    bool at_kink = false;   // point was rejected as too close to a nondifferentiability
};

// Compare the implemented backward pass against central finite differences
// of the (surrogate) loss composition at one parameter point.
inline GradCheckPoint gradcheck_point(const Graph& g, const QuboInstance& q,
                                      const VariantSpec& variant, const Model& model,
                                      double inv_temp, double kink_margin = 1e-3,
                                      double fd_step = 1e-5) {
    const Matrix adjacency = normalized_adjacency(g);
    const ForwardResult fwd = forward(model, adjacency, inv_temp);
    const std::vector<double> x = surrogate_post(model.activation, fwd.a_pre, inv_temp);

    GradCheckPoint out;
    for (double z : fwd.cache.z1.data)
        if (std::abs(z) < kink_margin) out.at_kink = true;
    if (model.activation.kind == ActivationKind::StepSte)
        for (double p : fwd.a_pre)
            if (std::abs(p - model.activation.lo) < kink_margin ||
                std::abs(p - model.activation.hi) < kink_margin)
                out.at_kink = true;
    if (variant.tnorm == TNorm::Standard)
        for (const auto& [i, j, c] : q.offdiag)
            if (std::abs(x[i] - x[j]) < kink_margin) out.at_kink = true;
    if (variant.tnorm == TNorm::Lukasiewicz) {
        for (const auto& [i, j, c] : q.offdiag)
            if (std::abs(x[i] + x[j] - 1.0) < kink_margin) out.at_kink = true;
        for (int i = 0; i < q.n; ++i)
            if (q.diag[i] != 0.0 && std::abs(x[i] - 0.5) < kink_margin) out.at_kink = true;
    }
    if (out.at_kink) return out;

    const std::vector<double> dl = hamiltonian_grad(q, x, variant.tnorm);
    const std::vector<double> analytic =
        detail::flatten_grads(backward(model, adjacency, fwd.cache, dl));

    Model scratch = model;
    auto loss_at = [&](std::span<const double> theta) {
        detail::unflatten_params(theta, scratch);
        const ForwardResult f = forward(scratch, adjacency, inv_temp);
        return hamiltonian(q, surrogate_post(scratch.activation, f.a_pre, inv_temp),
                           variant.tnorm);
    };
    const std::vector<double> theta = detail::flatten_params(model);
    const std::vector<double> fd = finite_diff_grad(loss_at, theta, fd_step);

    for (size_t i = 0; i < fd.size(); ++i) {
        const double denom = std::max({1.0, std::abs(analytic[i]), std::abs(fd[i])});
        out.max_err = std::max(out.max_err, std::abs(analytic[i] - fd[i]) / denom);
    }
    return out;
}

struct GradCheckReport {
    std::string variant;
    int points = 0;
    double max_err = 0.0;
    bool pass = false;
};

// Sample random (graph, instance, parameters) triples away from kinks and
// gradient-check each variant at the requested number of points.
inline std::vector<GradCheckReport> run_gradcheck(int points_per_variant, uint64_t seed,
                                                  double tolerance = 1e-4, int max_n = 10) {
    std::mt19937_64 rng(seed);
    std::vector<GradCheckReport> reports;
    for (const VariantSpec& variant : all_variants()) {
        GradCheckReport rep;
        rep.variant = variant.name;
        int attempts = 0;
        while (rep.points < points_per_variant && attempts < points_per_variant * 200) {
            ++attempts;
            std::uniform_int_distribution<int> n_dist(4, max_n);
            const int n = n_dist(rng);
            std::uniform_int_distribution<int> d_dist(1, n - 1);
            int d = d_dist(rng);
            if ((n * d) % 2 != 0) d = d > 1 ? d - 1 : d + 1;
            Graph g = generate_regular(n, d, rng);
            const QuboInstance q =
                rep.points % 2 == 0 ? encode_maxcut(g) : encode_mis(g, 2.0);
            const Model model = init_model(n, rng(), {}, variant.activation);
            const double inv_temp = variant.activation.kind == ActivationKind::TemperedSigmoid
                                        ? 1.0 + (rep.points % 5)
                                        : 1.0;
            const GradCheckPoint pt = gradcheck_point(g, q, variant, model, inv_temp);
            if (pt.at_kink) continue;
            rep.max_err = std::max(rep.max_err, pt.max_err);
            ++rep.points;
        }
        rep.pass = rep.points == points_per_variant && rep.max_err <= tolerance;
        reports.push_back(std::move(rep));
    }
    return reports;
}

}  // namespace pignn
