#pragma once

#include <cstdint>
#include <vector>

#include "anp/fusion.hpp"

namespace anp {

// Deep Taylor decomposition over the fusion network. The target's pre-softmax
// logit (clamped at 0) is taken as root relevance and redistributed backwards:
// z+ rule through the output layer (non-negative relu inputs), zB rule through
// the whitening-folded hidden layer (inputs bounded in [0,1]). Biases never
// absorb relevance, which keeps the redistribution conservative up to the
// epsilon stabilizer.
struct RelevanceReport {
    std::uint32_t target_anp = 0;
    double root_relevance = 0.0;
    std::vector<double> adj_contrib;
    std::vector<double> noun_contrib;
    bool degenerate = false;  // root relevance was 0; contributions all zero
};

inline constexpr double kRelevanceEpsilon = 1e-9;

// Rewrites the hidden layer to act on raw [0,1] inputs instead of whitened
// ones: w'_ji = w_ji / sigma_i, b'_j = b_j - sum_i w_ji * mu_i / sigma_i.
// Computed in double; the forward pass matches the original within 1e-6.
DenseLayer<double> fold_whitening(const FusionNetwork& net);

// R_i = sum_j (x_i w+_ji / (eps + sum_i' x_i' w+_ji')) R_j with w+ = max(w,0).
// Terms with an exactly zero pre-epsilon denominator contribute nothing.
std::vector<double> zplus_backprop(const DenseLayer<double>& layer,
                                   const std::vector<double>& input_activations,
                                   const std::vector<double>& output_relevance);

// R_i = sum_j (z_ji / (eps + sum_i' z_ji')) R_j with
// z_ji = x_i w_ji - lower w+_ji - upper w-_ji, w- = min(w,0).
std::vector<double> zb_backprop(const DenseLayer<double>& layer, const std::vector<double>& input,
                                const std::vector<double>& output_relevance, double lower = 0.0,
                                double upper = 1.0);

// Folds the whitening and promotes parameters to double once, for reuse
// across many (sample, target) queries on the same network.
class RelevanceExplainer {
public:
    explicit RelevanceExplainer(const FusionNetwork& net);

    double root_relevance(const Sample& sample, std::uint32_t target_anp) const;
    RelevanceReport explain(const Sample& sample, std::uint32_t target_anp) const;

    const DenseLayer<double>& folded_hidden() const { return folded_hidden_; }

private:
    FusionDims dims_;
    DenseLayer<double> folded_hidden_;  // over raw inputs
    DenseLayer<double> output_;

    // Raw input clamped into [0,1] after bounds validation.
    std::vector<double> raw_input(const Sample& sample) const;
};

double root_relevance(const FusionNetwork& net, const Sample& sample, std::uint32_t target_anp);
RelevanceReport explain(const FusionNetwork& net, const Sample& sample, std::uint32_t target_anp);

}  // namespace anp
