#include "anp/relevance.hpp"

#include <algorithm>
#include <cmath>

namespace anp {

namespace {

constexpr double kInputTolerance = 1e-6;
constexpr double kActivationTolerance = 1e-9;

DenseLayer<double> promote(const DenseLayer<float>& layer) {
    DenseLayer<double> out;
    out.weights = Matrix<double>(layer.fan_out(), layer.fan_in());
    for (std::size_t i = 0; i < layer.weights.data.size(); ++i)
        out.weights.data[i] = static_cast<double>(layer.weights.data[i]);
    out.biases.assign(layer.biases.begin(), layer.biases.end());
    return out;
}

}  // namespace

DenseLayer<double> fold_whitening(const FusionNetwork& net) {
    if (net.whitener.dim() != net.dims.n_in())
        throw ShapeError("fold_whitening: whitener length does not match the input dimension");
    DenseLayer<double> folded = promote(net.hidden);
    for (std::size_t j = 0; j < folded.fan_out(); ++j) {
        double* w = folded.weights.row(j);
        double bias_shift = 0.0;
        for (std::size_t i = 0; i < folded.fan_in(); ++i) {
            const double sigma = static_cast<double>(net.whitener.stddev[i]);
            const double mu = static_cast<double>(net.whitener.mean[i]);
            w[i] /= sigma;
            bias_shift += w[i] * mu;
        }
        folded.biases[j] -= bias_shift;
    }
    return folded;
}

std::vector<double> zplus_backprop(const DenseLayer<double>& layer,
                                   const std::vector<double>& input_activations,
                                   const std::vector<double>& output_relevance) {
    if (input_activations.size() != layer.fan_in())
        throw ShapeError("zplus_backprop: input length does not match fan_in");
    if (output_relevance.size() != layer.fan_out())
        throw ShapeError("zplus_backprop: relevance length does not match fan_out");
    for (const double x : input_activations)
        if (x < -kActivationTolerance)
            throw ValueError("zplus_backprop: negative input activation " + std::to_string(x));
    for (const double r : output_relevance)
        if (r < -kActivationTolerance)
            throw ValueError("zplus_backprop: negative output relevance " + std::to_string(r));

    std::vector<double> x(input_activations);
    for (auto& v : x)
        if (v < 0.0) v = 0.0;

    std::vector<double> result(layer.fan_in(), 0.0);
    for (std::size_t j = 0; j < layer.fan_out(); ++j) {
        const double rj = output_relevance[j];
        if (rj == 0.0) continue;
        const double* w = layer.weights.row(j);
        double denom = 0.0;
        for (std::size_t i = 0; i < layer.fan_in(); ++i)
            if (w[i] > 0.0) denom += x[i] * w[i];
        if (denom == 0.0) continue;  // no positive path: this unit redistributes nothing
        const double scale = rj / (kRelevanceEpsilon + denom);
        for (std::size_t i = 0; i < layer.fan_in(); ++i)
            if (w[i] > 0.0) result[i] += x[i] * w[i] * scale;
    }
    return result;
}

std::vector<double> zb_backprop(const DenseLayer<double>& layer, const std::vector<double>& input,
                                const std::vector<double>& output_relevance, double lower,
                                double upper) {
    if (input.size() != layer.fan_in())
        throw ShapeError("zb_backprop: input length does not match fan_in");
    if (output_relevance.size() != layer.fan_out())
        throw ShapeError("zb_backprop: relevance length does not match fan_out");
    for (const double v : input)
        if (v < lower - kInputTolerance || v > upper + kInputTolerance)
            throw ValueError("zb_backprop: input " + std::to_string(v) + " outside [" +
                             std::to_string(lower) + "," + std::to_string(upper) + "]");
    for (const double r : output_relevance)
        if (r < -kActivationTolerance)
            throw ValueError("zb_backprop: negative output relevance " + std::to_string(r));

    std::vector<double> x(input);
    for (auto& v : x) v = std::clamp(v, lower, upper);

    std::vector<double> z(layer.fan_in());
    std::vector<double> result(layer.fan_in(), 0.0);
    for (std::size_t j = 0; j < layer.fan_out(); ++j) {
        const double rj = output_relevance[j];
        if (rj == 0.0) continue;
        const double* w = layer.weights.row(j);
        double denom = 0.0;
        for (std::size_t i = 0; i < layer.fan_in(); ++i) {
            const double wp = w[i] > 0.0 ? w[i] : 0.0;
            const double wn = w[i] < 0.0 ? w[i] : 0.0;
            z[i] = x[i] * w[i] - lower * wp - upper * wn;
            denom += z[i];
        }
        if (denom == 0.0) continue;
        const double scale = rj / (kRelevanceEpsilon + denom);
        for (std::size_t i = 0; i < layer.fan_in(); ++i) result[i] += z[i] * scale;
    }
    return result;
}

RelevanceExplainer::RelevanceExplainer(const FusionNetwork& net)
    : dims_(net.dims), folded_hidden_(fold_whitening(net)), output_(promote(net.output)) {}

std::vector<double> RelevanceExplainer::raw_input(const Sample& sample) const {
    if (sample.adj_probs.size() != dims_.n_adj || sample.noun_probs.size() != dims_.n_noun)
        throw ShapeError("relevance: sample dimensions do not match the network");
    std::vector<double> x;
    x.reserve(dims_.n_in());
    auto push = [&](float p, const char* branch) {
        if (!std::isfinite(p)) throw ValueError(std::string(branch) + " vector has a non-finite entry");
        const double v = static_cast<double>(p);
        if (v < -kInputTolerance || v > 1.0 + kInputTolerance)
            throw ValueError(std::string(branch) + " vector has an entry outside [0,1]");
        x.push_back(std::clamp(v, 0.0, 1.0));
    };
    for (const float p : sample.adj_probs) push(p, "adjective probability");
    for (const float p : sample.noun_probs) push(p, "noun probability");
    return x;
}

double RelevanceExplainer::root_relevance(const Sample& sample, std::uint32_t target_anp) const {
    if (target_anp >= dims_.n_anp) throw ValueError("relevance: target anp out of range");
    const std::vector<double> x = raw_input(sample);
    const std::vector<double> h =
        relu(dense_forward(folded_hidden_, std::span<const double>(x)));
    const std::vector<double> logits = dense_forward(output_, std::span<const double>(h));
    return std::max(logits[target_anp], 0.0);
}

RelevanceReport RelevanceExplainer::explain(const Sample& sample, std::uint32_t target_anp) const {
    if (target_anp >= dims_.n_anp) throw ValueError("relevance: target anp out of range");
    const std::vector<double> x = raw_input(sample);
    const std::vector<double> h =
        relu(dense_forward(folded_hidden_, std::span<const double>(x)));
    const std::vector<double> logits = dense_forward(output_, std::span<const double>(h));

    RelevanceReport report;
    report.target_anp = target_anp;
    report.root_relevance = std::max(logits[target_anp], 0.0);
    report.adj_contrib.assign(dims_.n_adj, 0.0);
    report.noun_contrib.assign(dims_.n_noun, 0.0);
    if (report.root_relevance == 0.0) {
        report.degenerate = true;
        return report;
    }

    std::vector<double> out_rel(dims_.n_anp, 0.0);
    out_rel[target_anp] = report.root_relevance;
    const std::vector<double> hidden_rel = zplus_backprop(output_, h, out_rel);
    const std::vector<double> input_rel = zb_backprop(folded_hidden_, x, hidden_rel);

    std::copy(input_rel.begin(), input_rel.begin() + dims_.n_adj, report.adj_contrib.begin());
    std::copy(input_rel.begin() + dims_.n_adj, input_rel.end(), report.noun_contrib.begin());
    return report;
}

double root_relevance(const FusionNetwork& net, const Sample& sample, std::uint32_t target_anp) {
    return RelevanceExplainer(net).root_relevance(sample, target_anp);
}

RelevanceReport explain(const FusionNetwork& net, const Sample& sample, std::uint32_t target_anp) {
    return RelevanceExplainer(net).explain(sample, target_anp);
}

}  // namespace anp
