#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pignn/graph.hpp"
#include "pignn/matrix.hpp"
#include "pignn/util.hpp"

namespace pignn {

// Final nonlinearity of the node head. The step variants differ only in the
// surrogate derivative used on the backward pass.
enum class ActivationKind { Sigmoid, TemperedSigmoid, StepSte, StepSigmoidBackward };

struct ActivationVariant {
    ActivationKind kind = ActivationKind::Sigmoid;
    double lo = 0.0;
    double hi = 1.0;
};

inline std::string to_string(ActivationKind k) {
    switch (k) {
        case ActivationKind::Sigmoid: return "sigmoid";
        case ActivationKind::TemperedSigmoid: return "tempered-sigmoid";
        case ActivationKind::StepSte: return "step-ste";
        case ActivationKind::StepSigmoidBackward: return "step-sigmoid-backward";
    }
    return "?";
}

inline ActivationKind activation_from_string(const std::string& s) {
    if (s == "sigmoid") return ActivationKind::Sigmoid;
    if (s == "tempered-sigmoid") return ActivationKind::TemperedSigmoid;
    if (s == "step-ste") return ActivationKind::StepSte;
    if (s == "step-sigmoid-backward") return ActivationKind::StepSigmoidBackward;
    throw std::invalid_argument("unknown activation: " + s);
}

// Overflow-safe logistic sigmoid.
inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double step_activation(double x, double lo, double hi) { return x <= 0.0 ? lo : hi; }

// Two Kipf-Welling convolutions around a trainable embedding table:
// a_pre = A_hat * relu(A_hat * E * W1) * W2, a_post = activation(a_pre).
struct Model {
    Matrix embeddings;  // n x d0, trainable
    Matrix w1;          // d0 x d1
    Matrix w2;          // d1 x 1
    ActivationVariant activation;

    int node_count() const { return embeddings.rows; }
};

struct ModelOverrides {
    int d0 = 0;  // 0 = floor(sqrt(n))
    int d1 = 0;  // 0 = max(1, d0 / 2)
};

// Embeddings ~ U(-1,1) so pre-activations start spread around zero; weight
// matrices are Glorot-uniform. Draw order (embeddings, W1, W2, row-major)
// pins the bit pattern for a given seed.
inline Model init_model(int n, uint64_t seed, ModelOverrides overrides = {},
                        ActivationVariant activation = {}) {
    if (n < 1) throw std::invalid_argument("init_model: need n >= 1");
    const int d0 = overrides.d0 > 0 ? overrides.d0
                                    : static_cast<int>(std::floor(std::sqrt(static_cast<double>(n))));
    const int d1 = overrides.d1 > 0 ? overrides.d1 : std::max(1, d0 / 2);

    std::mt19937_64 rng(seed);
    auto fill_uniform = [&rng](Matrix& m, double limit) {
        std::uniform_real_distribution<double> dist(-limit, limit);
        for (double& v : m.data) v = dist(rng);
    };

    Model model;
    model.activation = activation;
    model.embeddings = Matrix(n, d0);
    fill_uniform(model.embeddings, 1.0);
    model.w1 = Matrix(d0, d1);
    fill_uniform(model.w1, std::sqrt(6.0 / (d0 + d1)));
    model.w2 = Matrix(d1, 1);
    fill_uniform(model.w2, std::sqrt(6.0 / (d1 + 1)));
    return model;
}

// A_hat = D^(-1/2) (A + I) D^(-1/2) with D the degree matrix of A + I.
inline Matrix normalized_adjacency(const Graph& g) {
    const int n = g.node_count();
    Matrix a(n, n);
    for (int v = 0; v < n; ++v) a(v, v) = 1.0 / (g.degree(v) + 1.0);
    for (const auto& [u, v] : g.edges()) {
        const double w = 1.0 / std::sqrt((g.degree(u) + 1.0) * (g.degree(v) + 1.0));
        a(u, v) = w;
        a(v, u) = w;
    }
    return a;
}

struct ForwardCache {
    Matrix m0;  // A_hat * E
    Matrix z1;  // m0 * W1 (pre-relu)
    Matrix h1;  // relu(z1)
    Matrix m1;  // A_hat * h1
    std::vector<double> a_pre;
    double inv_temp = 1.0;
    ActivationVariant activation;
};

struct ForwardResult {
    std::vector<double> a_pre;
    std::vector<double> a_post;
    ForwardCache cache;
};

inline ForwardResult forward(const Model& model, const Matrix& adjacency, double inv_temp = 1.0) {
    const int n = model.node_count();
    if (adjacency.rows != n || adjacency.cols != n)
        throw std::invalid_argument("forward: adjacency/model size mismatch");
    if (model.w1.rows != model.embeddings.cols || model.w2.rows != model.w1.cols ||
        model.w2.cols != 1)
        throw std::invalid_argument("forward: weight shapes do not chain");
    if (!(inv_temp >= 1.0)) throw std::invalid_argument("forward: inv_temp must be >= 1");

    ForwardCache cache;
    cache.inv_temp = inv_temp;
    cache.activation = model.activation;
    cache.m0 = matmul(adjacency, model.embeddings);
    cache.z1 = matmul(cache.m0, model.w1);
    cache.h1 = cache.z1;
    for (double& v : cache.h1.data) v = v > 0.0 ? v : 0.0;
    cache.m1 = matmul(adjacency, cache.h1);
    const Matrix out = matmul(cache.m1, model.w2);
    cache.a_pre = out.data;

    std::vector<double> a_post(n);
    const auto& act = model.activation;
    for (int i = 0; i < n; ++i) {
        switch (act.kind) {
            case ActivationKind::Sigmoid: a_post[i] = sigmoid(cache.a_pre[i]); break;
            case ActivationKind::TemperedSigmoid:
                a_post[i] = sigmoid(cache.a_pre[i] * inv_temp);
                break;
            case ActivationKind::StepSte:
            case ActivationKind::StepSigmoidBackward:
                a_post[i] = step_activation(cache.a_pre[i], act.lo, act.hi);
                break;
        }
    }

    ForwardResult result;
    result.a_pre = cache.a_pre;
    result.a_post = a_post;
    result.cache = std::move(cache);
    return result;
}

// Derivative substituted for the final activation on the backward pass:
// the true sigmoid derivative for the smooth variants, the clip derivative
// for step-ste, and sigma'(x) for step-sigmoid-backward.
inline double activation_backward_derivative(const ActivationVariant& act, double a_pre,
                                             double inv_temp) {
    switch (act.kind) {
        case ActivationKind::Sigmoid: {
            const double s = sigmoid(a_pre);
            return s * (1.0 - s);
        }
        case ActivationKind::TemperedSigmoid: {
            const double s = sigmoid(a_pre * inv_temp);
            return inv_temp * s * (1.0 - s);
        }
        case ActivationKind::StepSte:
            return (a_pre > act.lo && a_pre < act.hi) ? 1.0 : 0.0;
        case ActivationKind::StepSigmoidBackward: {
            const double s = sigmoid(a_pre);
            return s * (1.0 - s);
        }
    }
    return 0.0;
}

struct Gradients {
    Matrix embeddings;
    Matrix w1;
    Matrix w2;
};

inline Gradients backward(const Model& model, const Matrix& adjacency, const ForwardCache& cache,
                          std::span<const double> dl_da_post) {
    const int n = model.node_count();
    if (static_cast<int>(dl_da_post.size()) != n)
        throw std::invalid_argument("backward: gradient size mismatch");

    Matrix d_pre(n, 1);
    for (int i = 0; i < n; ++i)
        d_pre(i, 0) = dl_da_post[i] *
                      activation_backward_derivative(cache.activation, cache.a_pre[i],
                                                     cache.inv_temp);

    Gradients g;
    g.w2 = matmul_tn(cache.m1, d_pre);
    Matrix d_m1 = matmul_nt(d_pre, model.w2);   // n x d1
    Matrix d_h1 = matmul_tn(adjacency, d_m1);   // A_hat symmetric
    for (size_t k = 0; k < d_h1.data.size(); ++k)
        if (cache.z1.data[k] <= 0.0) d_h1.data[k] = 0.0;
    g.w1 = matmul_tn(cache.m0, d_h1);
    Matrix d_m0 = matmul_nt(d_h1, model.w1);    // n x d0
    g.embeddings = matmul_tn(adjacency, d_m0);
    return g;
}

// Adam with bias correction; one state per parameter tensor.
struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamTensorState {
    Matrix m;
    Matrix v;
};

inline void adam_step(Matrix& params, const Matrix& grads, AdamTensorState& state, double lr,
                      int64_t step_index, const AdamConfig& cfg = {}) {
    if (!params.same_shape(grads)) throw std::invalid_argument("adam_step: shape mismatch");
    if (state.m.data.empty()) {
        state.m = Matrix(params.rows, params.cols);
        state.v = Matrix(params.rows, params.cols);
    }
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step_index));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step_index));
    for (size_t i = 0; i < params.data.size(); ++i) {
        const double gi = grads.data[i];
        state.m.data[i] = cfg.beta1 * state.m.data[i] + (1.0 - cfg.beta1) * gi;
        state.v.data[i] = cfg.beta2 * state.v.data[i] + (1.0 - cfg.beta2) * gi * gi;
        const double mhat = state.m.data[i] / bc1;
        const double vhat = state.v.data[i] / bc2;
        params.data[i] -= lr * mhat / (std::sqrt(vhat) + cfg.epsilon);
    }
}

struct AdamState {
    AdamTensorState embeddings;
    AdamTensorState w1;
    AdamTensorState w2;
    int64_t step = 0;
};

inline void adam_step(Model& model, const Gradients& grads, AdamState& state, double lr,
                      const AdamConfig& cfg = {}) {
    ++state.step;
    adam_step(model.embeddings, grads.embeddings, state.embeddings, lr, state.step, cfg);
    adam_step(model.w1, grads.w1, state.w1, lr, state.step, cfg);
    adam_step(model.w2, grads.w2, state.w2, lr, state.step, cfg);
}

// Lossless text checkpoint: dimensions, activation tag, then the parameter
// tensors row-major with round-trip-exact decimals.
inline void save_model(const Model& model, std::ostream& out) {
    out << model.embeddings.rows << ' ' << model.embeddings.cols << ' ' << model.w1.cols << ' '
        << to_string(model.activation.kind) << '\n';
    auto dump = [&out](const Matrix& m) {
        for (size_t i = 0; i < m.data.size(); ++i)
            out << fmt_double(m.data[i]) << (i + 1 == m.data.size() ? '\n' : ' ');
        if (m.data.empty()) out << '\n';
    };
    dump(model.embeddings);
    dump(model.w1);
    dump(model.w2);
}

inline Model load_model(std::istream& in) {
    int n = 0, d0 = 0, d1 = 0;
    std::string act;
    if (!(in >> n >> d0 >> d1 >> act)) throw std::runtime_error("checkpoint: bad header");
    Model model;
    model.activation.kind = activation_from_string(act);
    model.embeddings = Matrix(n, d0);
    model.w1 = Matrix(d0, d1);
    model.w2 = Matrix(d1, 1);
    for (Matrix* m : {&model.embeddings, &model.w1, &model.w2})
        for (double& v : m->data)
            if (!(in >> v)) throw std::runtime_error("checkpoint: truncated parameters");
    return model;
}

}  // namespace pignn
