#include "anp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "anp/metrics.hpp"

namespace anp {

const char* anr_mode_name(AnrMode mode) {
    switch (mode) {
        case AnrMode::AnpCorrect: return "anp-correct";
        case AnrMode::AnpAdjCorrect: return "anp-adj";
        case AnrMode::AnpNounCorrect: return "anp-noun";
        case AnrMode::AnpAdjNounCorrect: return "anp-adj-noun";
        case AnrMode::AllTop5: return "all-top5";
    }
    return "?";
}

std::optional<AnrMode> anr_mode_from_name(const std::string& name) {
    if (name == "anp-correct") return AnrMode::AnpCorrect;
    if (name == "anp-adj") return AnrMode::AnpAdjCorrect;
    if (name == "anp-noun") return AnrMode::AnpNounCorrect;
    if (name == "anp-adj-noun") return AnrMode::AnpAdjNounCorrect;
    if (name == "all-top5") return AnrMode::AllTop5;
    return std::nullopt;
}

const char* orientation_name(Orientation o) {
    switch (o) {
        case Orientation::AdjectiveOriented: return "adjective-oriented";
        case Orientation::NounOriented: return "noun-oriented";
        case Orientation::Boundary: return "boundary";
    }
    return "?";
}

std::optional<double> anr_of_report(const RelevanceReport& report, std::size_t n_adj,
                                    std::size_t n_noun) {
    if (report.degenerate) return std::nullopt;
    if (n_adj < 1 || n_noun < 1) throw ValueError("anr_of_report: branch sizes must be >= 1");
    double adj_sum = 0.0, noun_sum = 0.0;
    for (const double c : report.adj_contrib) adj_sum += c;
    for (const double c : report.noun_contrib) noun_sum += c;
    if (!(adj_sum > 0.0) || !(noun_sum > 0.0)) return std::nullopt;
    return (adj_sum / static_cast<double>(n_adj)) / (noun_sum / static_cast<double>(n_noun));
}

namespace {

struct AnrAccumulator {
    double sum = 0.0;
    std::uint64_t count = 0;
};

}  // namespace

std::vector<AnrRecord> anr_table(const FusionNetwork& net, const std::vector<Sample>& samples,
                                 AnrMode mode, std::size_t k) {
    if (k < 1) throw ValueError("anr_table: k must be >= 1");
    const RelevanceExplainer explainer(net);
    const std::size_t n_adj = net.dims.n_adj;
    const std::size_t n_noun = net.dims.n_noun;
    std::vector<AnrAccumulator> acc(net.dims.n_anp);

    auto record = [&](const Sample& sample, std::uint32_t target) {
        const RelevanceReport report = explainer.explain(sample, target);
        const auto anr = anr_of_report(report, n_adj, n_noun);
        if (!anr) return;  // degenerate or one-sided report, excluded
        acc[target].sum += *anr;
        ++acc[target].count;
    };

    for (const auto& sample : samples) {
        const std::vector<float> logits = predict_logits(net, sample);
        if (mode == AnrMode::AllTop5) {
            for (const std::size_t target : topk_indices(logits, k))
                record(sample, static_cast<std::uint32_t>(target));
            continue;
        }
        if (!topk_hit(logits, sample.anp_label, k)) continue;
        const bool need_adj = mode == AnrMode::AnpAdjCorrect || mode == AnrMode::AnpAdjNounCorrect;
        const bool need_noun = mode == AnrMode::AnpNounCorrect || mode == AnrMode::AnpAdjNounCorrect;
        if (need_adj && !topk_hit(sample.adj_probs, sample.adj_label, k)) continue;
        if (need_noun && !topk_hit(sample.noun_probs, sample.noun_label, k)) continue;
        record(sample, sample.anp_label);
    }

    std::vector<AnrRecord> table;
    for (std::uint32_t c = 0; c < net.dims.n_anp; ++c) {
        if (acc[c].count == 0) continue;
        AnrRecord rec;
        rec.anp = c;
        rec.mode = mode;
        rec.anr = acc[c].sum / static_cast<double>(acc[c].count);
        rec.n_samples = acc[c].count;
        table.push_back(rec);
    }
    return table;
}

std::vector<OrientationLabel> classify_orientation(const std::vector<AnrRecord>& records) {
    std::vector<OrientationLabel> labels;
    labels.reserve(records.size());
    for (const auto& rec : records) {
        if (rec.n_samples == 0) continue;
        OrientationLabel label;
        label.anp = rec.anp;
        label.anr = rec.anr;
        if (std::abs(rec.anr - 1.0) <= 1e-9)
            label.label = Orientation::Boundary;
        else
            label.label = rec.anr > 1.0 ? Orientation::AdjectiveOriented : Orientation::NounOriented;
        labels.push_back(label);
    }
    return labels;
}

std::map<std::uint32_t, ContributionProfile> aggregate_all_contributions(
    const FusionNetwork& net, const std::vector<Sample>& samples, std::size_t k) {
    if (k < 1) throw ValueError("aggregate_contributions: k must be >= 1");
    const RelevanceExplainer explainer(net);
    std::map<std::uint32_t, ContributionProfile> profiles;

    for (const auto& sample : samples) {
        const std::vector<float> logits = predict_logits(net, sample);
        if (!topk_hit(logits, sample.anp_label, k)) continue;
        const RelevanceReport report = explainer.explain(sample, sample.anp_label);
        auto& profile = profiles[sample.anp_label];
        if (profile.n_events == 0) {
            profile.adj_mean.assign(net.dims.n_adj, 0.0);
            profile.noun_mean.assign(net.dims.n_noun, 0.0);
        }
        for (std::size_t i = 0; i < report.adj_contrib.size(); ++i)
            profile.adj_mean[i] += report.adj_contrib[i];
        for (std::size_t i = 0; i < report.noun_contrib.size(); ++i)
            profile.noun_mean[i] += report.noun_contrib[i];
        ++profile.n_events;
    }
    for (auto& [anp, profile] : profiles) {
        const double n = static_cast<double>(profile.n_events);
        for (auto& v : profile.adj_mean) v /= n;
        for (auto& v : profile.noun_mean) v /= n;
    }
    return profiles;
}

std::optional<ContributionProfile> aggregate_contributions(const FusionNetwork& net,
                                                           const std::vector<Sample>& samples,
                                                           std::uint32_t anp, std::size_t k) {
    auto profiles = aggregate_all_contributions(net, samples, k);
    const auto it = profiles.find(anp);
    if (it == profiles.end()) return std::nullopt;
    return std::move(it->second);
}

namespace {

std::set<std::size_t> topk_set(const std::vector<double>& scores, std::size_t k) {
    const auto order = topk_indices(scores, k);
    return {order.begin(), order.end()};
}

}  // namespace

bool profiles_equivalent(const ContributionProfile& a, const ContributionProfile& b, std::size_t k) {
    if (a.adj_mean.size() != b.adj_mean.size() || a.noun_mean.size() != b.noun_mean.size())
        throw ShapeError("profiles_equivalent: profiles have different branch sizes");
    return topk_set(a.adj_mean, k) == topk_set(b.adj_mean, k) &&
           topk_set(a.noun_mean, k) == topk_set(b.noun_mean, k);
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> visually_equivalent(
    const std::map<std::uint32_t, ContributionProfile>& profiles, std::size_t k) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
    for (auto it_a = profiles.begin(); it_a != profiles.end(); ++it_a) {
        auto it_b = it_a;
        for (++it_b; it_b != profiles.end(); ++it_b) {
            if (profiles_equivalent(it_a->second, it_b->second, k))
                pairs.emplace_back(it_a->first, it_b->first);
        }
    }
    return pairs;
}

RelatedConcepts related_concepts(const ContributionProfile& profile, const Vocabulary& vocab,
                                 std::size_t k) {
    if (profile.adj_mean.size() != vocab.n_adj() || profile.noun_mean.size() != vocab.n_noun())
        throw ShapeError("related_concepts: profile does not match the vocabulary");
    RelatedConcepts out;
    for (const std::size_t i : topk_indices(profile.adj_mean, k))
        out.adjectives.emplace_back(vocab.adjectives[i], profile.adj_mean[i]);
    for (const std::size_t i : topk_indices(profile.noun_mean, k))
        out.nouns.emplace_back(vocab.nouns[i], profile.noun_mean[i]);
    return out;
}

}  // namespace anp
