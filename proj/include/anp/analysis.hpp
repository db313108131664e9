#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "anp/dataio.hpp"
#include "anp/fusion.hpp"
#include "anp/relevance.hpp"

namespace anp {

// Event selection for the Adjective-to-Noun Ratio tables. The *Correct modes
// require the ground-truth ANP among the top-k fusion predictions and explain
// at the ground truth, optionally also requiring the composing adjective
// and/or noun among the top-k of the specialist vectors. AllTop5 explains
// every one of the top-k predicted ANPs of every sample at that prediction,
// ignoring ground truth.
enum class AnrMode {
    AnpCorrect,
    AnpAdjCorrect,
    AnpNounCorrect,
    AnpAdjNounCorrect,
    AllTop5,
};

const char* anr_mode_name(AnrMode mode);
std::optional<AnrMode> anr_mode_from_name(const std::string& name);

struct AnrRecord {
    std::uint32_t anp = 0;
    AnrMode mode = AnrMode::AnpCorrect;
    double anr = 0.0;
    std::uint64_t n_samples = 0;
};

// (sum adj / n_adj) / (sum noun / n_noun). Absent for degenerate reports and
// for reports whose branch sums are not both positive; such events are
// excluded from aggregation.
std::optional<double> anr_of_report(const RelevanceReport& report, std::size_t n_adj,
                                    std::size_t n_noun);

// Per-ANP mean of per-event ratios. ANPs with no qualifying event are absent.
std::vector<AnrRecord> anr_table(const FusionNetwork& net, const std::vector<Sample>& samples,
                                 AnrMode mode, std::size_t k = 5);

enum class Orientation {
    AdjectiveOriented,  // anr > 1
    NounOriented,       // anr < 1
    Boundary,           // anr within 1e-9 of 1
};

const char* orientation_name(Orientation o);

struct OrientationLabel {
    std::uint32_t anp = 0;
    double anr = 0.0;
    Orientation label = Orientation::Boundary;
};

std::vector<OrientationLabel> classify_orientation(const std::vector<AnrRecord>& records);

// Mean contribution vectors over qualifying events (ground-truth ANP among
// the top-k fusion predictions, explained at ground truth).
struct ContributionProfile {
    std::vector<double> adj_mean;
    std::vector<double> noun_mean;
    std::uint64_t n_events = 0;
};

std::map<std::uint32_t, ContributionProfile> aggregate_all_contributions(
    const FusionNetwork& net, const std::vector<Sample>& samples, std::size_t k = 5);

std::optional<ContributionProfile> aggregate_contributions(const FusionNetwork& net,
                                                           const std::vector<Sample>& samples,
                                                           std::uint32_t anp, std::size_t k = 5);

// True when the two profiles pick the same top-k adjective index set and the
// same top-k noun index set (order ignored).
bool profiles_equivalent(const ContributionProfile& a, const ContributionProfile& b, std::size_t k);

// Unordered ANP pairs (a < b) with identical top-k adjective and noun sets.
std::vector<std::pair<std::uint32_t, std::uint32_t>> visually_equivalent(
    const std::map<std::uint32_t, ContributionProfile>& profiles, std::size_t k = 5);

struct RelatedConcepts {
    std::vector<std::pair<std::string, double>> adjectives;  // descending score
    std::vector<std::pair<std::string, double>> nouns;
};

RelatedConcepts related_concepts(const ContributionProfile& profile, const Vocabulary& vocab,
                                 std::size_t k = 5);

}  // namespace anp
