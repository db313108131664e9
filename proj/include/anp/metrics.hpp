#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "anp/errors.hpp"

namespace anp {

namespace detail {

// Rank of `label` under (score descending, index ascending). Ties on score go
// to the lower class index.
template <typename T>
std::size_t score_rank(std::span<const T> scores, std::size_t label) {
    std::size_t rank = 0;
    const T s = scores[label];
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i] > s || (scores[i] == s && i < label)) ++rank;
    }
    return rank;
}

}  // namespace detail

template <typename T>
bool topk_hit(std::span<const T> scores, std::size_t label, std::size_t k) {
    if (k < 1) throw ValueError("topk_hit: k must be >= 1");
    if (label >= scores.size()) throw ValueError("topk_hit: label out of range");
    return detail::score_rank(scores, label) < k;
}

template <typename T>
bool topk_hit(const std::vector<T>& scores, std::size_t label, std::size_t k) {
    return topk_hit(std::span<const T>(scores), label, k);
}

// Indices of the k highest scores, ordered (score descending, index
// ascending). k is truncated to the number of classes.
template <typename T>
std::vector<std::size_t> topk_indices(std::span<const T> scores, std::size_t k) {
    if (k > scores.size()) k = scores.size();
    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    // Full sort keeps it simple; score vectors here are small.
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    order.resize(k);
    return order;
}

template <typename T>
std::vector<std::size_t> topk_indices(const std::vector<T>& scores, std::size_t k) {
    return topk_indices(std::span<const T>(scores), k);
}

// Hit/total tallies per class. Classes that never occur are reported absent
// rather than at zero accuracy.
class PerClassAccuracy {
public:
    explicit PerClassAccuracy(std::size_t n_classes) : hits_(n_classes, 0), totals_(n_classes, 0) {}

    void add(std::size_t label, bool hit) {
        if (label >= totals_.size()) throw ValueError("per-class accuracy: label out of range");
        ++totals_[label];
        if (hit) ++hits_[label];
    }

    std::size_t n_classes() const { return totals_.size(); }
    bool present(std::size_t c) const { return totals_[c] > 0; }
    std::uint64_t hits(std::size_t c) const { return hits_[c]; }
    std::uint64_t count(std::size_t c) const { return totals_[c]; }

    double accuracy_pct(std::size_t c) const {
        return 100.0 * static_cast<double>(hits_[c]) / static_cast<double>(totals_[c]);
    }

    std::vector<double> present_accuracies() const {
        std::vector<double> acc;
        for (std::size_t c = 0; c < totals_.size(); ++c)
            if (present(c)) acc.push_back(accuracy_pct(c));
        return acc;
    }

    std::uint64_t total_samples() const {
        std::uint64_t n = 0;
        for (const auto t : totals_) n += t;
        return n;
    }

    double overall_pct() const {
        std::uint64_t n = 0, h = 0;
        for (std::size_t c = 0; c < totals_.size(); ++c) {
            n += totals_[c];
            h += hits_[c];
        }
        if (n == 0) throw ValueError("per-class accuracy: no samples");
        return 100.0 * static_cast<double>(h) / static_cast<double>(n);
    }

private:
    std::vector<std::uint64_t> hits_;
    std::vector<std::uint64_t> totals_;
};

template <typename T>
PerClassAccuracy per_class_topk(const std::vector<std::vector<T>>& scores,
                                const std::vector<std::uint32_t>& labels, std::size_t n_classes,
                                std::size_t k) {
    if (scores.size() != labels.size()) throw ShapeError("per_class_topk: scores/labels misaligned");
    if (scores.empty()) throw ValueError("per_class_topk: empty dataset");
    PerClassAccuracy acc(n_classes);
    for (std::size_t s = 0; s < scores.size(); ++s)
        acc.add(labels[s], topk_hit(scores[s], labels[s], k));
    return acc;
}

// Conditional correctness percentages among adjective, noun and ANP
// detections. Entry (r, c) = share of samples with concept c correct among
// samples with concept r correct; rows with no qualifying samples are absent.
struct CoDetectionMatrix {
    static constexpr std::size_t kAdj = 0;
    static constexpr std::size_t kNoun = 1;
    static constexpr std::size_t kAnp = 2;

    std::array<std::array<double, 3>, 3> pct{};  // valid only where row_present
    std::array<std::uint64_t, 3> row_counts{};

    bool row_present(std::size_t r) const { return row_counts[r] > 0; }
};

class CoDetectionAccumulator {
public:
    void add(bool adj_hit, bool noun_hit, bool anp_hit) {
        const bool hits[3] = {adj_hit, noun_hit, anp_hit};
        for (std::size_t r = 0; r < 3; ++r) {
            if (!hits[r]) continue;
            ++cond_[r];
            for (std::size_t c = 0; c < 3; ++c)
                if (hits[c]) ++joint_[r][c];
        }
    }

    CoDetectionMatrix finish() const {
        CoDetectionMatrix m;
        for (std::size_t r = 0; r < 3; ++r) {
            m.row_counts[r] = cond_[r];
            if (cond_[r] == 0) continue;
            for (std::size_t c = 0; c < 3; ++c)
                m.pct[r][c] = 100.0 * static_cast<double>(joint_[r][c]) / static_cast<double>(cond_[r]);
        }
        return m;
    }

private:
    std::array<std::array<std::uint64_t, 3>, 3> joint_{};
    std::array<std::uint64_t, 3> cond_{};
};

// Adjective/noun correctness is judged from the specialist score vectors,
// ANP correctness from the fusion scores, all at the same k.
template <typename TSpec, typename TAnp>
CoDetectionMatrix codetection(const std::vector<std::vector<TSpec>>& adj_scores,
                              const std::vector<std::vector<TSpec>>& noun_scores,
                              const std::vector<std::vector<TAnp>>& anp_scores,
                              const std::vector<std::uint32_t>& adj_labels,
                              const std::vector<std::uint32_t>& noun_labels,
                              const std::vector<std::uint32_t>& anp_labels, std::size_t k) {
    const std::size_t n = adj_scores.size();
    if (noun_scores.size() != n || anp_scores.size() != n || adj_labels.size() != n ||
        noun_labels.size() != n || anp_labels.size() != n)
        throw ShapeError("codetection: misaligned sequences");
    CoDetectionAccumulator acc;
    for (std::size_t s = 0; s < n; ++s) {
        acc.add(topk_hit(adj_scores[s], adj_labels[s], k), topk_hit(noun_scores[s], noun_labels[s], k),
                topk_hit(anp_scores[s], anp_labels[s], k));
    }
    return acc.finish();
}

// Left-closed right-open bins over [0, 100], last bin closed; counts sum to
// the number of accuracies.
std::vector<std::uint64_t> accuracy_histogram(const std::vector<double>& accuracies_pct,
                                              double bin_width);

}  // namespace anp
