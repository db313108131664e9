#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "anp/errors.hpp"
#include "anp/rng.hpp"

namespace anp {

// Row-major matrix. Production parameters use T = float; the gradient-check
// path re-instantiates everything with T = double.
template <typename T>
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<T> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, T fill = T(0)) : rows(r), cols(c), data(r * c, fill) {}

    T& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
    const T* row(std::size_t i) const { return data.data() + i * cols; }
    T* row(std::size_t i) { return data.data() + i * cols; }
};

// Fully connected layer: output_j = biases[j] + sum_i weights(j, i) * input_i.
template <typename T>
struct DenseLayer {
    Matrix<T> weights;      // fan_out x fan_in
    std::vector<T> biases;  // fan_out

    std::size_t fan_in() const { return weights.cols; }
    std::size_t fan_out() const { return weights.rows; }
};

// Uniform init on [-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out))],
// biases zero. Deterministic for a given rng state; weights drawn row-major.
template <typename T>
DenseLayer<T> glorot_init(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    if (fan_in < 1 || fan_out < 1) throw ShapeError("glorot_init: fan_in and fan_out must be >= 1");
    DenseLayer<T> layer;
    layer.weights = Matrix<T>(fan_out, fan_in);
    layer.biases.assign(fan_out, T(0));
    const T bound = static_cast<T>(std::sqrt(6.0 / static_cast<double>(fan_in + fan_out)));
    for (auto& w : layer.weights.data) {
        // |2u-1| <= 1 exactly, so |w| <= bound survives rounding.
        const T spread = static_cast<T>(2.0 * rng.next_unit() - 1.0);
        w = bound * spread;
    }
    return layer;
}

template <typename T>
std::vector<T> dense_forward(const DenseLayer<T>& layer, std::span<const T> input) {
    if (input.size() != layer.fan_in())
        throw ShapeError("dense_forward: input length " + std::to_string(input.size()) +
                         " does not match fan_in " + std::to_string(layer.fan_in()));
    std::vector<T> out(layer.fan_out());
    for (std::size_t j = 0; j < layer.fan_out(); ++j) {
        T acc = layer.biases[j];
        const T* w = layer.weights.row(j);
        for (std::size_t i = 0; i < layer.fan_in(); ++i) acc += w[i] * input[i];
        out[j] = acc;
    }
    return out;
}

template <typename T>
std::vector<T> relu(std::vector<T> v) {
    for (auto& x : v)
        if (x < T(0)) x = T(0);
    return v;
}

// Max-subtracted softmax; every entry lands in (0, 1).
template <typename T>
std::vector<T> softmax(std::span<const T> logits) {
    if (logits.empty()) throw ShapeError("softmax: empty input");
    T hi = logits[0];
    for (const T x : logits)
        if (x > hi) hi = x;
    std::vector<T> out(logits.size());
    T sum = T(0);
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - hi);
        sum += out[i];
    }
    for (auto& x : out) x /= sum;
    return out;
}

template <typename T>
std::vector<T> softmax(const std::vector<T>& logits) {
    return softmax(std::span<const T>(logits));
}

inline constexpr double kCrossEntropyClamp = 1e-12;

template <typename T>
T cross_entropy(std::span<const T> probabilities, std::size_t label) {
    if (label >= probabilities.size())
        throw ValueError("cross_entropy: label " + std::to_string(label) + " out of range for " +
                         std::to_string(probabilities.size()) + " classes");
    const T p = probabilities[label];
    const T clamp = static_cast<T>(kCrossEntropyClamp);
    return -std::log(p > clamp ? p : clamp);
}

template <typename T>
T cross_entropy(const std::vector<T>& probabilities, std::size_t label) {
    return cross_entropy(std::span<const T>(probabilities), label);
}

// Activation record for one dense->relu->dense->softmax pass. backward()
// rejects traces whose shapes do not match the layers it is given.
template <typename T>
struct ForwardTrace {
    std::vector<T> input;
    std::vector<T> hidden_pre;
    std::vector<T> hidden_act;
    std::vector<T> logits;
    std::vector<T> probs;
};

template <typename T>
struct MlpGradients {
    Matrix<T> hidden_w;
    std::vector<T> hidden_b;
    Matrix<T> output_w;
    std::vector<T> output_b;

    static MlpGradients zeros_like(const DenseLayer<T>& hidden, const DenseLayer<T>& output) {
        MlpGradients g;
        g.hidden_w = Matrix<T>(hidden.fan_out(), hidden.fan_in());
        g.hidden_b.assign(hidden.fan_out(), T(0));
        g.output_w = Matrix<T>(output.fan_out(), output.fan_in());
        g.output_b.assign(output.fan_out(), T(0));
        return g;
    }
};

template <typename T>
ForwardTrace<T> mlp_forward(const DenseLayer<T>& hidden, const DenseLayer<T>& output,
                            std::span<const T> input) {
    if (hidden.fan_out() != output.fan_in())
        throw ShapeError("mlp_forward: hidden fan_out does not match output fan_in");
    ForwardTrace<T> trace;
    trace.input.assign(input.begin(), input.end());
    trace.hidden_pre = dense_forward(hidden, input);
    trace.hidden_act = relu(trace.hidden_pre);
    trace.logits = dense_forward(output, std::span<const T>(trace.hidden_act));
    trace.probs = softmax(trace.logits);
    return trace;
}

// Analytic gradients of cross_entropy(softmax(output(relu(hidden(x)))), label)
// with respect to all weights and biases. Accumulates into `grads` so batch
// sums build up across calls.
template <typename T>
void mlp_backward_accumulate(const DenseLayer<T>& hidden, const DenseLayer<T>& output,
                             const ForwardTrace<T>& trace, std::size_t label,
                             MlpGradients<T>& grads) {
    const std::size_t n_in = hidden.fan_in();
    const std::size_t n_hidden = hidden.fan_out();
    const std::size_t n_out = output.fan_out();
    if (trace.input.size() != n_in || trace.hidden_pre.size() != n_hidden ||
        trace.hidden_act.size() != n_hidden || trace.logits.size() != n_out ||
        trace.probs.size() != n_out)
        throw ShapeError("mlp_backward: activation record does not match the layers");
    if (label >= n_out) throw ValueError("mlp_backward: label out of range");
    if (grads.hidden_w.rows != n_hidden || grads.hidden_w.cols != n_in ||
        grads.output_w.rows != n_out || grads.output_w.cols != n_hidden)
        throw ShapeError("mlp_backward: gradient buffers do not match the layers");

    // d loss / d logit_k = p_k - [k == label]
    std::vector<T> dlogits = trace.probs;
    dlogits[label] -= T(1);

    std::vector<T> dhidden(n_hidden, T(0));
    for (std::size_t k = 0; k < n_out; ++k) {
        const T dk = dlogits[k];
        grads.output_b[k] += dk;
        T* gw = grads.output_w.row(k);
        const T* w = output.weights.row(k);
        for (std::size_t j = 0; j < n_hidden; ++j) {
            gw[j] += dk * trace.hidden_act[j];
            dhidden[j] += dk * w[j];
        }
    }
    for (std::size_t j = 0; j < n_hidden; ++j) {
        if (trace.hidden_pre[j] <= T(0)) dhidden[j] = T(0);
        grads.hidden_b[j] += dhidden[j];
        T* gw = grads.hidden_w.row(j);
        const T dj = dhidden[j];
        if (dj == T(0)) continue;
        for (std::size_t i = 0; i < n_in; ++i) gw[i] += dj * trace.input[i];
    }
}

template <typename T>
MlpGradients<T> mlp_backward(const DenseLayer<T>& hidden, const DenseLayer<T>& output,
                             const ForwardTrace<T>& trace, std::size_t label) {
    auto grads = MlpGradients<T>::zeros_like(hidden, output);
    mlp_backward_accumulate(hidden, output, trace, label, grads);
    return grads;
}

template <typename T>
void scale_gradients(MlpGradients<T>& grads, T factor) {
    for (auto& g : grads.hidden_w.data) g *= factor;
    for (auto& g : grads.hidden_b) g *= factor;
    for (auto& g : grads.output_w.data) g *= factor;
    for (auto& g : grads.output_b) g *= factor;
}

// Momentum SGD over the two-layer topology. The L2 term is added to the
// gradient for weights only, never biases.
template <typename T>
struct SgdState {
    T learning_rate;
    T momentum;
    T weight_decay;
    MlpGradients<T> velocity;

    SgdState(T lr, T mom, T wd, const DenseLayer<T>& hidden, const DenseLayer<T>& output)
        : learning_rate(lr), momentum(mom), weight_decay(wd),
          velocity(MlpGradients<T>::zeros_like(hidden, output)) {}
};

namespace detail {

template <typename T>
void sgd_apply(std::vector<T>& params, const std::vector<T>& grads, std::vector<T>& velocity,
               T lr, T momentum, T weight_decay, const char* what) {
    for (std::size_t i = 0; i < params.size(); ++i) {
        const T g = grads[i];
        if (!std::isfinite(g))
            throw ValueError(std::string("sgd_step: non-finite gradient in ") + what);
        const T g2 = g + weight_decay * params[i];
        velocity[i] = momentum * velocity[i] + g2;
        params[i] -= lr * velocity[i];
    }
}

}  // namespace detail

template <typename T>
void sgd_step(DenseLayer<T>& hidden, DenseLayer<T>& output, const MlpGradients<T>& grads,
              SgdState<T>& state) {
    if (grads.hidden_w.rows != hidden.fan_out() || grads.hidden_w.cols != hidden.fan_in() ||
        grads.output_w.rows != output.fan_out() || grads.output_w.cols != output.fan_in())
        throw ShapeError("sgd_step: gradient shapes do not match parameters");
    detail::sgd_apply(hidden.weights.data, grads.hidden_w.data, state.velocity.hidden_w.data,
                      state.learning_rate, state.momentum, state.weight_decay, "hidden weights");
    detail::sgd_apply(hidden.biases, grads.hidden_b, state.velocity.hidden_b, state.learning_rate,
                      state.momentum, T(0), "hidden biases");
    detail::sgd_apply(output.weights.data, grads.output_w.data, state.velocity.output_w.data,
                      state.learning_rate, state.momentum, state.weight_decay, "output weights");
    detail::sgd_apply(output.biases, grads.output_b, state.velocity.output_b, state.learning_rate,
                      state.momentum, T(0), "output biases");
}

// Central differences, (L(p+eps) - L(p-eps)) / (2 eps) per scalar parameter.
// Independent of the analytic path; the loss evaluator must be deterministic.
inline std::vector<double> finite_diff_grad(const std::function<double(const std::vector<double>&)>& loss,
                                            std::vector<double> params, double epsilon) {
    std::vector<double> grads(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double saved = params[i];
        params[i] = saved + epsilon;
        const double up = loss(params);
        params[i] = saved - epsilon;
        const double down = loss(params);
        params[i] = saved;
        grads[i] = (up - down) / (2.0 * epsilon);
    }
    return grads;
}

}  // namespace anp
