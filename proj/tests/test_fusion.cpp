#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>
#include <vector>

#include "anp/dataio.hpp"
#include "anp/fusion.hpp"
#include "anp/metrics.hpp"
#include "anp/rng.hpp"

using namespace anp;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    static int counter = 0;
    const fs::path dir =
        fs::temp_directory_path() / ("anp_fusion_test_" + std::to_string(::getpid()) + "_" +
                                     std::to_string(counter++));
    fs::create_directories(dir);
    return dir;
}

// Routing construction: 2 adjectives x 2 nouns, hidden unit (i,j) adds
// adjective i and noun j, output (i,j) reads only its hidden unit. The argmax
// over ANPs is then the planted (adjective, noun) pair.
FusionNetwork routing_net() {
    FusionNetwork net;
    net.dims = {2, 2, 4, 4};
    net.whitener = Whitener::identity(4);
    net.hidden.weights = Matrix<float>(4, 4);
    net.hidden.biases.assign(4, 0.0f);
    net.output.weights = Matrix<float>(4, 4);
    net.output.biases.assign(4, 0.0f);
    for (std::uint32_t i = 0; i < 2; ++i) {
        for (std::uint32_t j = 0; j < 2; ++j) {
            const std::uint32_t unit = i * 2 + j;
            net.hidden.weights(unit, i) = 1.0f;       // adjective input i
            net.hidden.weights(unit, 2 + j) = 1.0f;   // noun input j
            net.output.weights(unit, unit) = 1.0f;    // anp (i, j)
        }
    }
    return net;
}

std::vector<float> random_probs(Rng& rng, std::size_t n) {
    std::vector<double> raw(n);
    double sum = 0.0;
    for (auto& v : raw) {
        v = -std::log(1.0 - rng.next_unit());
        sum += v;
    }
    std::vector<float> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<float>(raw[i] / sum);
    return p;
}

}  // namespace

TEST_CASE("fit_whitener hand-evaluated fixtures") {
    const auto w = fit_whitener({{0.0f}, {1.0f}});
    CHECK(w.mean[0] == doctest::Approx(0.5));
    CHECK(w.stddev[0] == doctest::Approx(0.5));  // population std
    const auto lo = whiten(w, std::vector<float>{0.0f});
    const auto hi = whiten(w, std::vector<float>{1.0f});
    CHECK(lo[0] == doctest::Approx(-1.0));
    CHECK(hi[0] == doctest::Approx(1.0));
}

TEST_CASE("fit_whitener clamps constant columns") {
    const auto w = fit_whitener({{0.3f, 0.0f}, {0.3f, 1.0f}});
    CHECK(w.stddev[0] == kWhitenerStdFloor);
    const auto z = whiten(w, std::vector<float>{0.3f, 0.5f});
    CHECK(z[0] == doctest::Approx(0.0));
}

TEST_CASE("fit_whitener is nearly idempotent on standardized data") {
    // Column with mean 0 and population std 1: {-1, 1}.
    const auto w = fit_whitener({{-1.0f}, {1.0f}});
    CHECK(w.mean[0] == doctest::Approx(0.0));
    CHECK(w.stddev[0] == doctest::Approx(1.0));
}

TEST_CASE("fit_whitener rejects empty input") {
    CHECK_THROWS_AS(fit_whitener({}), ValueError);
}

TEST_CASE("build_anpnet produces the documented shapes") {
    const auto net = build_anpnet({117, 167, 1024, 553}, 1);
    CHECK(net.hidden.weights.rows == 1024);
    CHECK(net.hidden.weights.cols == 284);
    CHECK(net.output.weights.rows == 553);
    CHECK(net.output.weights.cols == 1024);
    for (const float b : net.hidden.biases) CHECK(b == 0.0f);
    for (const float m : net.whitener.mean) CHECK(m == 0.0f);
    for (const float s : net.whitener.stddev) CHECK(s == 1.0f);
}

TEST_CASE("build_anpnet is deterministic and supports tiny hidden layers") {
    const auto a = build_anpnet({2, 2, 4, 4}, 99);
    const auto b = build_anpnet({2, 2, 4, 4}, 99);
    CHECK(a.hidden.weights.data == b.hidden.weights.data);
    CHECK(a.output.weights.data == b.output.weights.data);

    const auto bottleneck = build_anpnet({2, 2, 1, 4}, 7);
    CHECK(bottleneck.hidden.weights.rows == 1);
    const std::vector<float> adj{0.5f, 0.5f}, noun{0.5f, 0.5f};
    const auto p = predict(bottleneck, adj, noun);
    CHECK(p.size() == 4);
}

TEST_CASE("predict returns a probability distribution") {
    Rng rng(17);
    const auto net = build_anpnet({5, 7, 16, 9}, 3);
    for (int trial = 0; trial < 50; ++trial) {
        const auto adj = random_probs(rng, 5);
        const auto noun = random_probs(rng, 7);
        const auto p = predict(net, adj, noun);
        double sum = 0.0;
        for (const double v : p) {
            CHECK(v > 0.0);
            sum += v;
        }
        CHECK(std::abs(sum - 1.0) < 1e-9);
    }
}

TEST_CASE("predict with zero weights is uniform") {
    FusionNetwork net;
    net.dims = {2, 3, 4, 5};
    net.whitener = Whitener::identity(5);
    net.hidden.weights = Matrix<float>(4, 5);
    net.hidden.biases.assign(4, 0.0f);
    net.output.weights = Matrix<float>(5, 4);
    net.output.biases.assign(5, 0.0f);
    const std::vector<float> adj{0.9f, 0.1f}, noun{0.2f, 0.3f, 0.5f};
    const auto p = predict(net, adj, noun);
    for (const double v : p) CHECK(v == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("routing net predicts the planted pair") {
    const auto net = routing_net();
    for (std::uint32_t i = 0; i < 2; ++i) {
        for (std::uint32_t j = 0; j < 2; ++j) {
            std::vector<float> adj{0.2f, 0.2f}, noun{0.2f, 0.2f};
            adj[i] = 0.8f;
            noun[j] = 0.8f;
            const auto p = predict(net, adj, noun);
            std::size_t argmax = 0;
            for (std::size_t c = 1; c < p.size(); ++c)
                if (p[c] > p[argmax]) argmax = c;
            CHECK(argmax == i * 2 + j);
        }
    }
}

TEST_CASE("predict validates inputs") {
    const auto net = build_anpnet({2, 2, 4, 4}, 1);
    const std::vector<float> good{0.5f, 0.5f};
    const std::vector<float> short_vec{1.0f};
    CHECK_THROWS_AS(predict(net, short_vec, good), ShapeError);
    const std::vector<float> out_of_range{1.5f, -0.5f};
    CHECK_THROWS_AS(predict(net, out_of_range, good), ValueError);
    // Rounding noise inside the tolerance is fine.
    const std::vector<float> noisy{1.0f + 5e-7f, -5e-7f};
    CHECK_NOTHROW(predict(net, noisy, good));
}

namespace {

std::pair<Vocabulary, std::vector<Sample>> separable_synth(std::uint64_t seed) {
    SynthConfig cfg;
    cfg.n_adj = 3;
    cfg.n_noun = 2;
    cfg.samples_per_anp = 60;
    cfg.adj_signal = {8.0};
    cfg.noun_signal = {8.0};
    cfg.noise_temp = 1.0;
    cfg.seed = seed;
    return synth_generate(cfg);
}

}  // namespace

TEST_CASE("train learns a separable problem and is seed-reproducible") {
    auto [vocab, samples] = separable_synth(51);
    auto [train_set, test_set] = stratified_split(samples, static_cast<std::uint32_t>(vocab.n_anp()), 0.8, 9);

    TrainConfig cfg;
    cfg.epochs = 12;
    cfg.batch_size = 32;
    cfg.seed = 4;
    FusionDims dims{3, 2, 32, 6};

    auto net = build_anpnet(dims, cfg.seed);
    const auto history = train(net, train_set, nullptr, cfg);
    CHECK(history.size() == 12);

    std::size_t hits = 0;
    for (const auto& s : test_set)
        if (topk_hit(predict_logits(net, s), s.anp_label, 1)) ++hits;
    const double top1 = static_cast<double>(hits) / static_cast<double>(test_set.size());
    CHECK(top1 >= 0.9);

    // Identical config and seed: identical history and parameters.
    auto net2 = build_anpnet(dims, cfg.seed);
    const auto history2 = train(net2, train_set, nullptr, cfg);
    CHECK(net.hidden.weights.data == net2.hidden.weights.data);
    CHECK(net.output.weights.data == net2.output.weights.data);
    for (std::size_t e = 0; e < history.size(); ++e)
        CHECK(history[e].train_loss == history2[e].train_loss);
}

TEST_CASE("train config defaults are the documented hyperparameters") {
    const TrainConfig cfg;
    CHECK(cfg.learning_rate == 0.01f);
    CHECK(cfg.momentum == 0.9f);
    CHECK(cfg.batch_size == 128);
    CHECK(cfg.weight_decay == 1e-4f);
    CHECK(cfg.epochs == 30);
    CHECK(cfg.shuffle);
}

TEST_CASE("train aborts with a batch diagnostic when the run diverges") {
    auto [vocab, samples] = separable_synth(55);
    TrainConfig cfg;
    cfg.epochs = 4;
    cfg.batch_size = 32;
    cfg.learning_rate = 1e30f;  // one step blows the parameters up
    cfg.seed = 6;
    auto net = build_anpnet({3, 2, 8, 6}, 1);
    try {
        train(net, samples, nullptr, cfg);
        FAIL("expected ValueError");
    } catch (const ValueError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("epoch") != std::string::npos);
    }
}

TEST_CASE("train with zero learning rate keeps parameters at initialization") {
    auto [vocab, samples] = separable_synth(52);
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 16;
    cfg.learning_rate = 0.0f;
    cfg.seed = 11;
    auto net = build_anpnet({3, 2, 8, 6}, 77);
    const auto before_hidden = net.hidden.weights.data;
    const auto before_output = net.output.weights.data;
    train(net, samples, nullptr, cfg);
    CHECK(net.hidden.weights.data == before_hidden);
    CHECK(net.output.weights.data == before_output);
}

TEST_CASE("whitener statistics are frozen during training") {
    auto [vocab, samples] = separable_synth(53);
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.batch_size = 16;
    cfg.seed = 5;
    auto net = build_anpnet({3, 2, 8, 6}, 1);
    const auto history1 = train(net, samples, nullptr, cfg);
    const auto mean_after_fit = net.whitener.mean;
    const auto std_after_fit = net.whitener.stddev;

    // More epochs on the same fitted network must not move the statistics.
    cfg.epochs = 4;
    auto net2 = build_anpnet({3, 2, 8, 6}, 1);
    train(net2, samples, nullptr, cfg);
    CHECK(net2.whitener.mean == mean_after_fit);
    CHECK(net2.whitener.stddev == std_after_fit);
}

TEST_CASE("train reports validation accuracy when a split is supplied") {
    auto [vocab, samples] = separable_synth(54);
    auto [train_set, val_set] = stratified_split(samples, static_cast<std::uint32_t>(vocab.n_anp()), 0.8, 2);
    TrainConfig cfg;
    cfg.epochs = 6;
    cfg.batch_size = 32;
    cfg.seed = 8;
    auto net = build_anpnet({3, 2, 16, 6}, cfg.seed);
    const auto history = train(net, train_set, &val_set, cfg);
    CHECK(history.back().has_val);
    CHECK(history.back().val_top1_pct >= 80.0);
    CHECK(history.back().val_top5_pct >= history.back().val_top1_pct);
}

TEST_CASE("checkpoint round-trip reproduces the network bit-exactly") {
    const fs::path dir = temp_dir();
    auto net = build_anpnet({3, 4, 8, 5}, 13);
    // Non-trivial whitener so every field is exercised.
    Rng rng(14);
    for (auto& m : net.whitener.mean) m = static_cast<float>(rng.uniform(0.0, 1.0));
    for (auto& s : net.whitener.stddev) s = static_cast<float>(rng.uniform(0.1, 1.0));

    const fs::path path = dir / "net.anpm";
    save_checkpoint(net, path);
    const auto loaded = load_checkpoint(path);
    CHECK(loaded.dims == net.dims);
    CHECK(loaded.whitener.mean == net.whitener.mean);
    CHECK(loaded.whitener.stddev == net.whitener.stddev);
    CHECK(loaded.hidden.weights.data == net.hidden.weights.data);
    CHECK(loaded.hidden.biases == net.hidden.biases);
    CHECK(loaded.output.weights.data == net.output.weights.data);
    CHECK(loaded.output.biases == net.output.biases);

    Rng prng(15);
    for (int trial = 0; trial < 100; ++trial) {
        const auto adj = random_probs(prng, 3);
        const auto noun = random_probs(prng, 4);
        CHECK(predict(net, adj, noun) == predict(loaded, adj, noun));
    }
    fs::remove_all(dir);
}

TEST_CASE("checkpoint corruption raises distinct error categories") {
    const fs::path dir = temp_dir();
    const auto net = build_anpnet({2, 2, 4, 4}, 3);
    const fs::path path = dir / "net.anpm";
    save_checkpoint(net, path);

    auto clobber = [&](std::size_t offset, char value) {
        fs::path copy = dir / "broken.anpm";
        fs::copy_file(path, copy, fs::copy_options::overwrite_existing);
        std::fstream f(copy, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(static_cast<std::streamoff>(offset));
        f.put(value);
        f.close();
        return copy;
    };

    CHECK_THROWS_AS(load_checkpoint(clobber(0, 'X')), BadMagicError);
    CHECK_THROWS_AS(load_checkpoint(clobber(4, 0x7f)), BadVersionError);

    // Truncations at several depths all land in the truncation category.
    const auto full_size = fs::file_size(path);
    for (const std::size_t keep : {2ul, 5ul, 12ul, static_cast<unsigned long>(full_size - 3)}) {
        const fs::path cut = dir / "cut.anpm";
        std::ifstream in(path, std::ios::binary);
        std::vector<char> bytes(keep);
        in.read(bytes.data(), static_cast<std::streamsize>(keep));
        std::ofstream out(cut, std::ios::binary);
        out.write(bytes.data(), static_cast<std::streamsize>(keep));
        out.close();
        CHECK_THROWS_AS(load_checkpoint(cut), TruncatedError);
    }
    fs::remove_all(dir);
}

TEST_CASE("loaded checkpoint still validates query shapes") {
    const fs::path dir = temp_dir();
    const auto net = build_anpnet({2, 2, 4, 4}, 3);
    const fs::path path = dir / "net.anpm";
    save_checkpoint(net, path);
    const auto loaded = load_checkpoint(path);
    const std::vector<float> three{0.3f, 0.3f, 0.4f};
    const std::vector<float> two{0.5f, 0.5f};
    CHECK_THROWS_AS(predict(loaded, three, two), ShapeError);
    fs::remove_all(dir);
}
