#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "anp/errors.hpp"

namespace anp {

// Adjective and noun class names plus the pair list that defines the ANP
// classes. Index = position; ANP names are derived as "adjective noun".
struct Vocabulary {
    std::vector<std::string> adjectives;
    std::vector<std::string> nouns;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> anps;  // (adjective, noun)

    std::size_t n_adj() const { return adjectives.size(); }
    std::size_t n_noun() const { return nouns.size(); }
    std::size_t n_anp() const { return anps.size(); }

    std::string anp_name(std::size_t anp) const {
        return adjectives[anps[anp].first] + " " + nouns[anps[anp].second];
    }
    std::optional<std::uint32_t> find_anp(const std::string& name) const;
};

// One observation: the two specialist probability vectors plus ground truth.
struct Sample {
    std::vector<float> adj_probs;
    std::vector<float> noun_probs;
    std::uint32_t adj_label = 0;
    std::uint32_t noun_label = 0;
    std::uint32_t anp_label = 0;
};

struct Dataset {
    std::uint32_t n_adj = 0;
    std::uint32_t n_noun = 0;
    std::uint32_t n_anp = 0;
    std::vector<Sample> samples;
};

// Vocabulary files: adjectives.txt / nouns.txt (one token per line, 0-based
// index = line number) and anps.csv (lines "adj_index,noun_index").
Vocabulary load_vocab(const std::filesystem::path& dir);
void write_vocab(const Vocabulary& vocab, const std::filesystem::path& dir);

struct VocabReport {
    std::vector<std::string> warnings;
    bool clean() const { return warnings.empty(); }
};

// Curation checks: adjectives paired with fewer than 3 distinct nouns,
// unreferenced tokens, duplicate pairs. Warnings only; loading already
// rejects structurally broken files.
VocabReport validate_vocab(const Vocabulary& vocab);

void write_dataset(const std::filesystem::path& path, const Dataset& data);
Dataset read_dataset(const std::filesystem::path& path);

// Throws DimMismatchError when the dataset header disagrees with the
// vocabulary, ValueError when labels contradict the ANP pairing.
void check_dataset_against_vocab(const Dataset& data, const Vocabulary& vocab);

// CSV rows: adj_label,noun_label,anp_label,<n_adj adj probs>,<n_noun noun
// probs>. Header row required. Each probability block must sum to 1 within
// 1e-3 and is renormalized to sum exactly 1.
std::vector<Sample> import_csv(const std::filesystem::path& path, const Vocabulary& vocab);

// Per-ANP split: floor(fraction*n) samples (at least 1) to train, rest to
// test. Classes with fewer than 2 samples are rejected.
std::pair<std::vector<Sample>, std::vector<Sample>> stratified_split(
    const std::vector<Sample>& samples, std::uint32_t n_anp, double train_fraction,
    std::uint64_t seed);

// Synthetic data with planted structure. Per sample of ANP c with composing
// pair (i, j): adj_probs = softmax((adj_signal[c] * onehot(i) + noise) /
// noise_temp), noun side analogous. Entries of duplicate_pairs (a, b) make
// ANP b draw from ANP a's generator, so their samples are distributionally
// identical while keeping their own labels.
struct SynthConfig {
    std::uint32_t n_adj = 0;
    std::uint32_t n_noun = 0;
    // Empty means the full n_adj x n_noun grid, ordered adjective-major.
    std::vector<std::pair<std::uint32_t, std::uint32_t>> anps;
    std::uint32_t samples_per_anp = 0;
    std::vector<double> adj_signal;   // size 1 (broadcast) or n_anp
    std::vector<double> noun_signal;  // size 1 (broadcast) or n_anp
    double noise_temp = 1.0;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> duplicate_pairs;
    std::uint64_t seed = 0;
};

std::pair<Vocabulary, std::vector<Sample>> synth_generate(const SynthConfig& config);

// Parses the key-value config format accepted by the synth command.
SynthConfig parse_synth_config(const std::filesystem::path& path);

inline constexpr std::uint16_t kDatasetFormatVersion = 1;

}  // namespace anp
