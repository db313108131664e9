#include "anp/fusion.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "anp/metrics.hpp"
#include "anp/rng.hpp"

namespace anp {

Whitener fit_whitener(const std::vector<std::vector<float>>& inputs) {
    if (inputs.empty()) throw ValueError("fit_whitener: no samples");
    const std::size_t dim = inputs[0].size();
    for (const auto& row : inputs)
        if (row.size() != dim) throw ShapeError("fit_whitener: inconsistent input lengths");

    const double n = static_cast<double>(inputs.size());
    Whitener w;
    w.mean.resize(dim);
    w.stddev.resize(dim);
    for (std::size_t d = 0; d < dim; ++d) {
        double sum = 0.0;
        for (const auto& row : inputs) sum += row[d];
        const double mean = sum / n;
        double sq = 0.0;
        for (const auto& row : inputs) {
            const double delta = row[d] - mean;
            sq += delta * delta;
        }
        const double std_pop = std::sqrt(sq / n);  // population, not sample
        w.mean[d] = static_cast<float>(mean);
        w.stddev[d] = static_cast<float>(std::max(std_pop, static_cast<double>(kWhitenerStdFloor)));
    }
    return w;
}

void whiten_into(const Whitener& w, std::span<const float> input, float* out) {
    if (input.size() != w.dim()) throw ShapeError("whiten: input length does not match statistics");
    for (std::size_t d = 0; d < input.size(); ++d) out[d] = (input[d] - w.mean[d]) / w.stddev[d];
}

std::vector<float> whiten(const Whitener& w, std::span<const float> input) {
    std::vector<float> out(input.size());
    whiten_into(w, input, out.data());
    return out;
}

FusionNetwork build_anpnet(FusionDims dims, std::uint64_t seed) {
    if (dims.n_adj < 1 || dims.n_noun < 1 || dims.hidden < 1 || dims.n_anp < 1)
        throw ShapeError("build_anpnet: all dimensions must be >= 1");
    FusionNetwork net;
    net.dims = dims;
    net.whitener = Whitener::identity(dims.n_in());
    Rng rng(seed);
    net.hidden = glorot_init<float>(dims.n_in(), dims.hidden, rng);
    net.output = glorot_init<float>(dims.hidden, dims.n_anp, rng);
    return net;
}

namespace {

void check_probs(std::span<const float> probs, std::size_t expected, const char* branch) {
    if (probs.size() != expected)
        throw ShapeError(std::string(branch) + " vector has length " + std::to_string(probs.size()) +
                         ", expected " + std::to_string(expected));
    for (const float p : probs) {
        if (!std::isfinite(p))
            throw ValueError(std::string(branch) + " vector has a non-finite entry");
        if (p < -kProbTolerance || p > 1.0f + kProbTolerance)
            throw ValueError(std::string(branch) + " vector has an entry outside [0,1]: " +
                             std::to_string(p));
    }
}

}  // namespace

std::vector<float> concat_input(const FusionNetwork& net, std::span<const float> adj_probs,
                                std::span<const float> noun_probs) {
    check_probs(adj_probs, net.dims.n_adj, "adjective probability");
    check_probs(noun_probs, net.dims.n_noun, "noun probability");
    std::vector<float> x(net.dims.n_in());
    std::copy(adj_probs.begin(), adj_probs.end(), x.begin());
    std::copy(noun_probs.begin(), noun_probs.end(), x.begin() + net.dims.n_adj);
    return x;
}

std::vector<float> predict_logits(const FusionNetwork& net, std::span<const float> adj_probs,
                                  std::span<const float> noun_probs) {
    const std::vector<float> x = concat_input(net, adj_probs, noun_probs);
    const std::vector<float> xw = whiten(net.whitener, x);
    const std::vector<float> h = relu(dense_forward(net.hidden, std::span<const float>(xw)));
    return dense_forward(net.output, std::span<const float>(h));
}

std::vector<float> predict_logits(const FusionNetwork& net, const Sample& sample) {
    return predict_logits(net, sample.adj_probs, sample.noun_probs);
}

std::vector<double> predict(const FusionNetwork& net, std::span<const float> adj_probs,
                            std::span<const float> noun_probs) {
    const std::vector<float> logits = predict_logits(net, adj_probs, noun_probs);
    std::vector<double> wide(logits.begin(), logits.end());
    return softmax(wide);
}

std::vector<double> predict(const FusionNetwork& net, const Sample& sample) {
    return predict(net, sample.adj_probs, sample.noun_probs);
}

namespace {

// Whitened inputs for the whole set, one contiguous row per sample.
std::vector<float> whitened_matrix(const FusionNetwork& net, const std::vector<Sample>& samples) {
    const std::size_t dim = net.dims.n_in();
    std::vector<float> flat(samples.size() * dim);
    for (std::size_t s = 0; s < samples.size(); ++s) {
        const std::vector<float> x = concat_input(net, samples[s].adj_probs, samples[s].noun_probs);
        whiten_into(net.whitener, x, flat.data() + s * dim);
    }
    return flat;
}

}  // namespace

std::vector<EpochStats> train(FusionNetwork& net, const std::vector<Sample>& train_samples,
                              const std::vector<Sample>* validation, const TrainConfig& config) {
    if (train_samples.empty()) throw ValueError("train: empty training set");
    if (config.batch_size < 1) throw ValueError("train: batch_size must be >= 1");
    if (config.epochs < 1) throw ValueError("train: epochs must be >= 1");
    for (std::size_t s = 0; s < train_samples.size(); ++s)
        if (train_samples[s].anp_label >= net.dims.n_anp)
            throw ValueError("train: anp label out of range at sample " + std::to_string(s));

    // Whitener statistics come from the training portion only and stay fixed
    // for the rest of the run.
    {
        std::vector<std::vector<float>> rows;
        rows.reserve(train_samples.size());
        for (const auto& s : train_samples) rows.push_back(concat_input(net, s.adj_probs, s.noun_probs));
        net.whitener = fit_whitener(rows);
    }

    const std::size_t n = train_samples.size();
    const std::size_t dim = net.dims.n_in();
    const std::vector<float> inputs = whitened_matrix(net, train_samples);

    SgdState<float> state(config.learning_rate, config.momentum, config.weight_decay, net.hidden,
                          net.output);
    auto batch_grads = MlpGradients<float>::zeros_like(net.hidden, net.output);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(config.seed);

    std::vector<EpochStats> history;
    history.reserve(config.epochs);

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        if (config.shuffle) shuffle(order, rng);
        double loss_sum = 0.0;

        for (std::size_t start = 0, batch_index = 0; start < n; start += config.batch_size, ++batch_index) {
            const std::size_t count = std::min(config.batch_size, n - start);
            std::fill(batch_grads.hidden_w.data.begin(), batch_grads.hidden_w.data.end(), 0.0f);
            std::fill(batch_grads.hidden_b.begin(), batch_grads.hidden_b.end(), 0.0f);
            std::fill(batch_grads.output_w.data.begin(), batch_grads.output_w.data.end(), 0.0f);
            std::fill(batch_grads.output_b.begin(), batch_grads.output_b.end(), 0.0f);

            for (std::size_t b = 0; b < count; ++b) {
                const std::size_t s = order[start + b];
                const std::span<const float> x(inputs.data() + s * dim, dim);
                const auto trace = mlp_forward(net.hidden, net.output, x);
                const std::size_t label = train_samples[s].anp_label;
                const double loss = cross_entropy(trace.probs, label);
                if (!std::isfinite(loss))
                    throw ValueError("train: non-finite loss at epoch " + std::to_string(epoch) +
                                     ", batch " + std::to_string(batch_index));
                loss_sum += loss;
                mlp_backward_accumulate(net.hidden, net.output, trace, label, batch_grads);
            }
            scale_gradients(batch_grads, 1.0f / static_cast<float>(count));
            try {
                sgd_step(net.hidden, net.output, batch_grads, state);
            } catch (const ValueError& e) {
                throw ValueError(std::string(e.what()) + " (epoch " + std::to_string(epoch) +
                                 ", batch " + std::to_string(batch_index) + ")");
            }
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.train_loss = loss_sum / static_cast<double>(n);
        if (validation && !validation->empty()) {
            std::size_t top1 = 0, top5 = 0;
            for (const auto& s : *validation) {
                const std::vector<float> logits = predict_logits(net, s);
                if (topk_hit(logits, s.anp_label, 1)) ++top1;
                if (topk_hit(logits, s.anp_label, std::min<std::size_t>(5, logits.size()))) ++top5;
            }
            stats.has_val = true;
            stats.val_top1_pct = 100.0 * static_cast<double>(top1) / static_cast<double>(validation->size());
            stats.val_top5_pct = 100.0 * static_cast<double>(top5) / static_cast<double>(validation->size());
        }
        history.push_back(stats);
    }
    return history;
}

// ---- checkpoint io -----------------------------------------------------

namespace {

constexpr char kCheckpointMagic[4] = {'A', 'N', 'P', 'M'};

void put_bytes(std::ofstream& out, const void* data, std::size_t n) {
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}
void put_u16(std::ofstream& out, std::uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
    put_bytes(out, b, 2);
}
void put_u32(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    put_bytes(out, b, 4);
}
void put_u64(std::ofstream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    put_bytes(out, b, 8);
}
void put_f32(std::ofstream& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

void put_counted_array(std::ofstream& out, const std::vector<float>& values) {
    put_u64(out, values.size());
    for (const float v : values) put_f32(out, v);
}

struct CheckpointReader {
    std::ifstream in;
    std::string path;

    explicit CheckpointReader(const std::filesystem::path& p) : in(p, std::ios::binary), path(p.string()) {
        if (!in) throw IoError("cannot open for reading: " + path);
    }

    void read_exact(void* dst, std::size_t n, const char* what) {
        in.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in.gcount()) != n)
            throw TruncatedError(path + ": truncated while reading " + std::string(what));
    }
    std::uint16_t u16(const char* what) {
        unsigned char b[2];
        read_exact(b, 2, what);
        return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
    }
    std::uint32_t u32(const char* what) {
        unsigned char b[4];
        read_exact(b, 4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
        return v;
    }
    std::uint64_t u64(const char* what) {
        unsigned char b[8];
        read_exact(b, 8, what);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
        return v;
    }
    float f32(const char* what) { return std::bit_cast<float>(u32(what)); }

    std::vector<float> f32_array(std::size_t n, const char* what) {
        std::vector<float> out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = f32(what);
        return out;
    }

    std::vector<float> counted_array(std::size_t expected, const char* what) {
        const std::uint64_t count = u64(what);
        if (count != expected)
            throw DimMismatchError(path + ": " + std::string(what) + " holds " + std::to_string(count) +
                                   " elements, expected " + std::to_string(expected));
        return f32_array(expected, what);
    }
};

void check_finite(const std::vector<float>& values, const std::string& path, const char* what) {
    for (const float v : values)
        if (!std::isfinite(v)) throw ValueError(path + ": non-finite value in " + std::string(what));
}

}  // namespace

void save_checkpoint(const FusionNetwork& net, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    put_bytes(out, kCheckpointMagic, 4);
    put_u16(out, kCheckpointFormatVersion);
    put_u32(out, net.dims.n_adj);
    put_u32(out, net.dims.n_noun);
    put_u32(out, net.dims.hidden);
    put_u32(out, net.dims.n_anp);
    for (const float v : net.whitener.mean) put_f32(out, v);
    for (const float v : net.whitener.stddev) put_f32(out, v);
    put_counted_array(out, net.hidden.weights.data);
    put_counted_array(out, net.hidden.biases);
    put_counted_array(out, net.output.weights.data);
    put_counted_array(out, net.output.biases);
    out.close();
    if (!out) throw IoError("write failed: " + path.string());
}

FusionNetwork load_checkpoint(const std::filesystem::path& path) {
    CheckpointReader r(path);
    char magic[4];
    r.read_exact(magic, 4, "magic");
    if (std::memcmp(magic, kCheckpointMagic, 4) != 0)
        throw BadMagicError(r.path + ": not a checkpoint file (bad magic)");
    const std::uint16_t version = r.u16("version");
    if (version != kCheckpointFormatVersion)
        throw BadVersionError(r.path + ": unsupported checkpoint format version " + std::to_string(version));

    FusionNetwork net;
    net.dims.n_adj = r.u32("n_adj");
    net.dims.n_noun = r.u32("n_noun");
    net.dims.hidden = r.u32("hidden size");
    net.dims.n_anp = r.u32("n_anp");
    if (net.dims.n_adj == 0 || net.dims.n_noun == 0 || net.dims.hidden == 0 || net.dims.n_anp == 0)
        throw DimMismatchError(r.path + ": zero dimension in header");

    const std::size_t n_in = net.dims.n_in();
    net.whitener.mean = r.f32_array(n_in, "whitener mean");
    net.whitener.stddev = r.f32_array(n_in, "whitener stddev");
    check_finite(net.whitener.mean, r.path, "whitener mean");
    check_finite(net.whitener.stddev, r.path, "whitener stddev");
    for (const float s : net.whitener.stddev)
        if (s < kWhitenerStdFloor)
            throw ValueError(r.path + ": whitener stddev below the clamp floor");

    net.hidden.weights = Matrix<float>(net.dims.hidden, n_in);
    net.hidden.weights.data = r.counted_array(static_cast<std::size_t>(net.dims.hidden) * n_in,
                                              "hidden weights");
    net.hidden.biases = r.counted_array(net.dims.hidden, "hidden biases");
    net.output.weights = Matrix<float>(net.dims.n_anp, net.dims.hidden);
    net.output.weights.data = r.counted_array(
        static_cast<std::size_t>(net.dims.n_anp) * net.dims.hidden, "output weights");
    net.output.biases = r.counted_array(net.dims.n_anp, "output biases");

    check_finite(net.hidden.weights.data, r.path, "hidden weights");
    check_finite(net.hidden.biases, r.path, "hidden biases");
    check_finite(net.output.weights.data, r.path, "output weights");
    check_finite(net.output.biases, r.path, "output biases");
    return net;
}

}  // namespace anp
