#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "anp/dataio.hpp"
#include "anp/nn.hpp"

namespace anp {

// Per-dimension standardization statistics fitted on training inputs.
// Standard deviations are population ones, clamped below at 1e-6 so constant
// columns stay harmless.
struct Whitener {
    std::vector<float> mean;
    std::vector<float> stddev;

    std::size_t dim() const { return mean.size(); }

    static Whitener identity(std::size_t dim) {
        Whitener w;
        w.mean.assign(dim, 0.0f);
        w.stddev.assign(dim, 1.0f);
        return w;
    }
};

inline constexpr float kWhitenerStdFloor = 1e-6f;

Whitener fit_whitener(const std::vector<std::vector<float>>& inputs);

void whiten_into(const Whitener& w, std::span<const float> input, float* out);
std::vector<float> whiten(const Whitener& w, std::span<const float> input);

struct FusionDims {
    std::uint32_t n_adj = 0;
    std::uint32_t n_noun = 0;
    std::uint32_t hidden = 0;
    std::uint32_t n_anp = 0;

    std::uint32_t n_in() const { return n_adj + n_noun; }
    bool operator==(const FusionDims&) const = default;
};

// The fused classifier over concatenated specialist probabilities:
// whiten -> dense(hidden) -> relu -> dense(n_anp) -> softmax.
struct FusionNetwork {
    FusionDims dims;
    Whitener whitener;
    DenseLayer<float> hidden;
    DenseLayer<float> output;
};

// Glorot-initialized layers, zero biases, identity whitener placeholder.
FusionNetwork build_anpnet(FusionDims dims, std::uint64_t seed);

// Tolerance on probability inputs; external files carry rounding noise.
inline constexpr float kProbTolerance = 1e-6f;

// Raw concatenated input [adj | noun], validated against bounds.
std::vector<float> concat_input(const FusionNetwork& net, std::span<const float> adj_probs,
                                std::span<const float> noun_probs);

// Pre-softmax scores (float pipeline, shared by training and evaluation).
std::vector<float> predict_logits(const FusionNetwork& net, std::span<const float> adj_probs,
                                  std::span<const float> noun_probs);
std::vector<float> predict_logits(const FusionNetwork& net, const Sample& sample);

// Full ANP distribution; the softmax over float logits is taken in double so
// the result sums to 1 within 1e-9.
std::vector<double> predict(const FusionNetwork& net, std::span<const float> adj_probs,
                            std::span<const float> noun_probs);
std::vector<double> predict(const FusionNetwork& net, const Sample& sample);

struct TrainConfig {
    std::size_t epochs = 30;
    std::size_t batch_size = 128;
    float learning_rate = 0.01f;
    float momentum = 0.9f;
    float weight_decay = 1e-4f;
    std::uint64_t seed = 0;
    bool shuffle = true;
};

struct EpochStats {
    std::size_t epoch = 0;      // 1-based
    double train_loss = 0.0;    // mean cross-entropy over the epoch
    bool has_val = false;
    double val_top1_pct = 0.0;
    double val_top5_pct = 0.0;
};

// Fits the whitener on the training samples (once, before the first step),
// then runs momentum SGD. The whitener is never updated afterwards. The
// optional validation set only feeds the history; it never affects training.
std::vector<EpochStats> train(FusionNetwork& net, const std::vector<Sample>& train_samples,
                              const std::vector<Sample>* validation, const TrainConfig& config);

// Checkpoint file, little-endian: magic "ANPM", version u16, dims 4 x u32,
// whitener mean then stddev as f32 arrays sized by dims, then each of hidden
// weights (row-major), hidden biases, output weights, output biases preceded
// by its element count as u64.
void save_checkpoint(const FusionNetwork& net, const std::filesystem::path& path);
FusionNetwork load_checkpoint(const std::filesystem::path& path);

inline constexpr std::uint16_t kCheckpointFormatVersion = 1;

}  // namespace anp
