#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <vector>

#include "anp/metrics.hpp"
#include "anp/rng.hpp"

using namespace anp;

TEST_CASE("topk_hit fixtures") {
    const std::vector<double> scores{0.1, 0.9, 0.3, 0.2};
    CHECK(topk_hit(scores, 1, 1));   // strictly highest
    CHECK(!topk_hit(scores, 0, 1));

    // Label ranked 6th by score, k = 5.
    const std::vector<double> six{0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3};
    CHECK(!topk_hit(six, 5, 5));
    CHECK(topk_hit(six, 4, 5));

    // Ten equal scores: tie-break ranks indices 0-4 first, so label 7 misses.
    const std::vector<double> equal(10, 1.0);
    CHECK(!topk_hit(equal, 7, 5));
    CHECK(topk_hit(equal, 4, 5));
    CHECK(topk_hit(equal, 7, 8));
}

TEST_CASE("topk_hit validates arguments") {
    const std::vector<double> scores{0.5, 0.5};
    CHECK_THROWS_AS(topk_hit(scores, 2, 1), ValueError);
    CHECK_THROWS_AS(topk_hit(scores, 0, 0), ValueError);
}

TEST_CASE("topk_hit is monotone in k") {
    Rng rng(55);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng.below(12));
        std::vector<double> scores(n);
        for (auto& s : scores) s = rng.below(4);  // coarse values force ties
        const std::size_t label = static_cast<std::size_t>(rng.below(n));
        bool prev = false;
        for (std::size_t k = 1; k <= n; ++k) {
            const bool hit = topk_hit(scores, label, k);
            if (prev) CHECK(hit);
            prev = hit;
        }
        CHECK(prev);  // k = n always hits
    }
}

TEST_CASE("topk_indices orders by score then index") {
    const std::vector<double> scores{0.3, 0.9, 0.3, 0.1};
    const auto top = topk_indices(scores, 3);
    CHECK(top == std::vector<std::size_t>{1, 0, 2});
    CHECK(topk_indices(scores, 10).size() == 4);
}

TEST_CASE("per-class accuracy fixtures") {
    PerClassAccuracy all_right(3);
    all_right.add(0, true);
    all_right.add(1, true);
    all_right.add(1, true);
    CHECK(all_right.accuracy_pct(0) == 100.0);
    CHECK(all_right.accuracy_pct(1) == 100.0);
    CHECK(!all_right.present(2));  // absent, not zero

    PerClassAccuracy half(1);
    half.add(0, true);
    half.add(0, false);
    CHECK(half.accuracy_pct(0) == 50.0);
}

TEST_CASE("overall accuracy equals the sample-weighted mean of per-class accuracies") {
    Rng rng(66);
    PerClassAccuracy acc(7);
    for (int i = 0; i < 500; ++i)
        acc.add(static_cast<std::size_t>(rng.below(7)), rng.below(3) != 0);
    double weighted = 0.0;
    std::uint64_t n = 0;
    for (std::size_t c = 0; c < acc.n_classes(); ++c) {
        if (!acc.present(c)) continue;
        weighted += acc.accuracy_pct(c) * static_cast<double>(acc.count(c));
        n += acc.count(c);
    }
    CHECK(acc.overall_pct() == doctest::Approx(weighted / static_cast<double>(n)).epsilon(1e-12));
}

TEST_CASE("per_class_topk runs over score tables") {
    const std::vector<std::vector<double>> scores{{0.9, 0.1}, {0.2, 0.8}, {0.7, 0.3}};
    const std::vector<std::uint32_t> labels{0, 1, 1};
    const auto acc = per_class_topk(scores, labels, 2, 1);
    CHECK(acc.accuracy_pct(0) == 100.0);
    CHECK(acc.accuracy_pct(1) == 50.0);
    CHECK_THROWS_AS(per_class_topk<double>({}, {}, 2, 1), ValueError);
}

TEST_CASE("codetection two-sample enumeration fixture") {
    CoDetectionAccumulator acc;
    acc.add(true, true, true);
    acc.add(true, false, false);
    const auto m = acc.finish();

    REQUIRE(m.row_present(CoDetectionMatrix::kAdj));
    CHECK(m.pct[0][0] == 100.0);
    CHECK(m.pct[0][1] == 50.0);
    CHECK(m.pct[0][2] == 50.0);
    CHECK(m.row_counts[0] == 2);

    REQUIRE(m.row_present(CoDetectionMatrix::kNoun));
    REQUIRE(m.row_present(CoDetectionMatrix::kAnp));
    for (std::size_t c = 0; c < 3; ++c) {
        CHECK(m.pct[1][c] == 100.0);
        CHECK(m.pct[2][c] == 100.0);
    }
}

TEST_CASE("codetection diagonal is exactly 100 and empty rows are absent") {
    CoDetectionAccumulator single;
    single.add(true, true, true);
    const auto m1 = single.finish();
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 3; ++c) CHECK(m1.pct[r][c] == 100.0);

    Rng rng(77);
    CoDetectionAccumulator random_acc;
    for (int i = 0; i < 300; ++i)
        random_acc.add(rng.below(2) != 0, rng.below(2) != 0, rng.below(2) != 0);
    const auto m = random_acc.finish();
    for (std::size_t r = 0; r < 3; ++r)
        if (m.row_present(r)) CHECK(m.pct[r][r] == 100.0);

    CoDetectionAccumulator never_noun;
    never_noun.add(true, false, false);
    const auto m2 = never_noun.finish();
    CHECK(!m2.row_present(CoDetectionMatrix::kNoun));
    CHECK(!m2.row_present(CoDetectionMatrix::kAnp));
    CHECK(m2.row_present(CoDetectionMatrix::kAdj));
}

TEST_CASE("codetection over aligned score tables") {
    // Sample 1: everything correct at k=1; sample 2: adjective only.
    const std::vector<std::vector<double>> adj{{0.9, 0.1}, {0.8, 0.2}};
    const std::vector<std::vector<double>> noun{{0.9, 0.1}, {0.2, 0.8}};
    const std::vector<std::vector<double>> anp{{0.9, 0.1}, {0.3, 0.7}};
    const std::vector<std::uint32_t> adj_labels{0, 0};
    const std::vector<std::uint32_t> noun_labels{0, 0};
    const std::vector<std::uint32_t> anp_labels{0, 0};
    const auto m = codetection(adj, noun, anp, adj_labels, noun_labels, anp_labels, 1);
    CHECK(m.pct[0][0] == 100.0);
    CHECK(m.pct[0][1] == 50.0);
    CHECK(m.pct[0][2] == 50.0);
}

TEST_CASE("accuracy_histogram fixtures") {
    const auto bins = accuracy_histogram({0.0, 10.0, 10.0}, 10.0);
    REQUIRE(bins.size() == 10);
    CHECK(bins[0] == 1);
    CHECK(bins[1] == 2);
    for (std::size_t b = 2; b < bins.size(); ++b) CHECK(bins[b] == 0);

    // 100 lands in the closed last bin.
    const auto top = accuracy_histogram({100.0}, 10.0);
    CHECK(top[9] == 1);

    const auto empty = accuracy_histogram({}, 10.0);
    std::uint64_t total = 0;
    for (const auto c : empty) total += c;
    CHECK(total == 0);
}

TEST_CASE("accuracy_histogram counts sum to the number of classes") {
    Rng rng(88);
    std::vector<double> acc;
    for (int i = 0; i < 137; ++i) acc.push_back(rng.uniform(0.0, 100.0));
    acc.push_back(100.0);
    const auto bins = accuracy_histogram(acc, 7.5);
    std::uint64_t total = 0;
    for (const auto c : bins) total += c;
    CHECK(total == acc.size());
    CHECK_THROWS_AS(accuracy_histogram({101.0}, 10.0), ValueError);
    CHECK_THROWS_AS(accuracy_histogram({50.0}, 0.0), ValueError);
}
