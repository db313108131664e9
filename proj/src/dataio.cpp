#include "anp/dataio.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "anp/config.hpp"
#include "anp/nn.hpp"
#include "anp/rng.hpp"

namespace anp {

namespace {

// ---- little-endian binary helpers -------------------------------------

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

struct ByteReader {
    std::ifstream in;
    std::string path;

    ByteReader(const std::filesystem::path& p) : in(p, std::ios::binary), path(p.string()) {
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

    void f32_array(float* dst, std::size_t n, const char* what) {
        for (std::size_t i = 0; i < n; ++i) dst[i] = f32(what);
    }
};

constexpr char kDatasetMagic[4] = {'A', 'N', 'P', 'D'};

std::vector<std::string> read_token_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    std::vector<std::string> tokens;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos)
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": empty token line");
        tokens.push_back(line);
    }
    return tokens;
}

std::uint32_t parse_index(const std::string& text, const std::string& where) {
    if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos)
        throw ParseError(where + ": expected a non-negative integer, got '" + text + "'");
    unsigned long v = 0;
    try {
        v = std::stoul(text);
    } catch (const std::exception&) {
        throw ParseError(where + ": integer out of range: '" + text + "'");
    }
    if (v > 0xffffffffUL) throw ParseError(where + ": index too large: '" + text + "'");
    return static_cast<std::uint32_t>(v);
}

}  // namespace

std::optional<std::uint32_t> Vocabulary::find_anp(const std::string& name) const {
    for (std::size_t i = 0; i < anps.size(); ++i)
        if (anp_name(i) == name) return static_cast<std::uint32_t>(i);
    return std::nullopt;
}

Vocabulary load_vocab(const std::filesystem::path& dir) {
    Vocabulary vocab;
    vocab.adjectives = read_token_lines(dir / "adjectives.txt");
    vocab.nouns = read_token_lines(dir / "nouns.txt");

    const auto anps_path = dir / "anps.csv";
    std::ifstream in(anps_path);
    if (!in) throw IoError("cannot open for reading: " + anps_path.string());
    std::string line;
    std::size_t lineno = 0;
    std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) throw ParseError(anps_path.string() + ":" + std::to_string(lineno) + ": empty line");
        const auto where = anps_path.string() + ":" + std::to_string(lineno);
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ParseError(where + ": expected 'adj_index,noun_index'");
        const std::uint32_t a = parse_index(line.substr(0, comma), where);
        const std::uint32_t n = parse_index(line.substr(comma + 1), where);
        if (a >= vocab.adjectives.size())
            throw ParseError(where + ": adjective index " + std::to_string(a) + " out of range");
        if (n >= vocab.nouns.size())
            throw ParseError(where + ": noun index " + std::to_string(n) + " out of range");
        if (!seen.insert({a, n}).second)
            throw ParseError(where + ": duplicate anp (" + std::to_string(a) + "," + std::to_string(n) + ")");
        vocab.anps.emplace_back(a, n);
    }
    return vocab;
}

void write_vocab(const Vocabulary& vocab, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "adjectives.txt", std::ios::binary);
        if (!out) throw IoError("cannot open for writing: " + (dir / "adjectives.txt").string());
        for (const auto& a : vocab.adjectives) out << a << '\n';
    }
    {
        std::ofstream out(dir / "nouns.txt", std::ios::binary);
        if (!out) throw IoError("cannot open for writing: " + (dir / "nouns.txt").string());
        for (const auto& n : vocab.nouns) out << n << '\n';
    }
    {
        std::ofstream out(dir / "anps.csv", std::ios::binary);
        if (!out) throw IoError("cannot open for writing: " + (dir / "anps.csv").string());
        for (const auto& [a, n] : vocab.anps) out << a << ',' << n << '\n';
    }
}

VocabReport validate_vocab(const Vocabulary& vocab) {
    VocabReport report;
    std::map<std::uint32_t, std::set<std::uint32_t>> nouns_per_adj;
    std::vector<std::size_t> adj_refs(vocab.n_adj(), 0), noun_refs(vocab.n_noun(), 0);
    std::set<std::pair<std::uint32_t, std::uint32_t>> seen;

    for (const auto& [a, n] : vocab.anps) {
        if (a >= vocab.n_adj() || n >= vocab.n_noun()) {
            report.warnings.push_back("anp pair (" + std::to_string(a) + "," + std::to_string(n) +
                                      ") references an out-of-range token");
            continue;
        }
        if (!seen.insert({a, n}).second)
            report.warnings.push_back("duplicate anp pair (" + std::to_string(a) + "," +
                                      std::to_string(n) + ")");
        nouns_per_adj[a].insert(n);
        ++adj_refs[a];
        ++noun_refs[n];
    }
    for (std::size_t a = 0; a < vocab.n_adj(); ++a) {
        if (adj_refs[a] == 0) {
            report.warnings.push_back("adjective '" + vocab.adjectives[a] + "' is not referenced by any anp");
            continue;
        }
        const auto distinct = nouns_per_adj[static_cast<std::uint32_t>(a)].size();
        if (distinct < 3)
            report.warnings.push_back("adjective '" + vocab.adjectives[a] + "' is paired with only " +
                                      std::to_string(distinct) + " distinct noun(s)");
    }
    for (std::size_t n = 0; n < vocab.n_noun(); ++n)
        if (noun_refs[n] == 0)
            report.warnings.push_back("noun '" + vocab.nouns[n] + "' is not referenced by any anp");
    return report;
}

void write_dataset(const std::filesystem::path& path, const Dataset& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    put_bytes(out, kDatasetMagic, 4);
    put_u16(out, kDatasetFormatVersion);
    put_u64(out, data.samples.size());
    put_u32(out, data.n_adj);
    put_u32(out, data.n_noun);
    put_u32(out, data.n_anp);
    for (const auto& s : data.samples) {
        if (s.adj_probs.size() != data.n_adj || s.noun_probs.size() != data.n_noun)
            throw ShapeError("write_dataset: sample dimensions disagree with header");
        put_u32(out, s.adj_label);
        put_u32(out, s.noun_label);
        put_u32(out, s.anp_label);
        for (const float p : s.adj_probs) put_f32(out, p);
        for (const float p : s.noun_probs) put_f32(out, p);
    }
    out.close();
    if (!out) throw IoError("write failed: " + path.string());
}

Dataset read_dataset(const std::filesystem::path& path) {
    ByteReader r(path);
    char magic[4];
    r.read_exact(magic, 4, "magic");
    if (std::memcmp(magic, kDatasetMagic, 4) != 0)
        throw BadMagicError(r.path + ": not a dataset file (bad magic)");
    const std::uint16_t version = r.u16("version");
    if (version != kDatasetFormatVersion)
        throw BadVersionError(r.path + ": unsupported dataset format version " + std::to_string(version));

    Dataset data;
    const std::uint64_t n_samples = r.u64("sample count");
    data.n_adj = r.u32("n_adj");
    data.n_noun = r.u32("n_noun");
    data.n_anp = r.u32("n_anp");
    if (data.n_adj == 0 || data.n_noun == 0 || data.n_anp == 0)
        throw DimMismatchError(r.path + ": zero dimension in header");

    data.samples.resize(n_samples);
    for (std::uint64_t s = 0; s < n_samples; ++s) {
        Sample& sample = data.samples[s];
        sample.adj_label = r.u32("adj label");
        sample.noun_label = r.u32("noun label");
        sample.anp_label = r.u32("anp label");
        if (sample.adj_label >= data.n_adj || sample.noun_label >= data.n_noun ||
            sample.anp_label >= data.n_anp)
            throw ValueError(r.path + ": sample " + std::to_string(s) + " has a label out of range");
        sample.adj_probs.resize(data.n_adj);
        sample.noun_probs.resize(data.n_noun);
        r.f32_array(sample.adj_probs.data(), data.n_adj, "adjective probabilities");
        r.f32_array(sample.noun_probs.data(), data.n_noun, "noun probabilities");
        for (const float p : sample.adj_probs)
            if (!std::isfinite(p))
                throw ValueError(r.path + ": sample " + std::to_string(s) + " has a non-finite value");
        for (const float p : sample.noun_probs)
            if (!std::isfinite(p))
                throw ValueError(r.path + ": sample " + std::to_string(s) + " has a non-finite value");
    }
    return data;
}

void check_dataset_against_vocab(const Dataset& data, const Vocabulary& vocab) {
    if (data.n_adj != vocab.n_adj() || data.n_noun != vocab.n_noun() || data.n_anp != vocab.n_anp())
        throw DimMismatchError("dataset dims (" + std::to_string(data.n_adj) + "," +
                               std::to_string(data.n_noun) + "," + std::to_string(data.n_anp) +
                               ") disagree with vocabulary (" + std::to_string(vocab.n_adj()) + "," +
                               std::to_string(vocab.n_noun()) + "," + std::to_string(vocab.n_anp()) + ")");
    for (std::size_t s = 0; s < data.samples.size(); ++s) {
        const Sample& sample = data.samples[s];
        const auto& pair = vocab.anps[sample.anp_label];
        if (pair.first != sample.adj_label || pair.second != sample.noun_label)
            throw ValueError("sample " + std::to_string(s) +
                             ": adjective/noun labels disagree with the anp pairing");
    }
}

std::vector<Sample> import_csv(const std::filesystem::path& path, const Vocabulary& vocab) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    const std::size_t n_adj = vocab.n_adj();
    const std::size_t n_noun = vocab.n_noun();
    const std::size_t n_fields = 3 + n_adj + n_noun;

    std::string line;
    if (!std::getline(in, line)) throw ParseError(path.string() + ": missing header row");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && (std::isdigit(static_cast<unsigned char>(line[0])) || line[0] == '-'))
        throw ParseError(path.string() + ": missing header row");

    auto normalize_block = [&](std::vector<float>& block, std::size_t row) {
        double sum = 0.0;
        for (const float p : block) sum += p;
        if (sum < 1.0 - 1e-3 || sum > 1.0 + 1e-3)
            throw ValueError(path.string() + ": row " + std::to_string(row) +
                             ": probabilities sum to " + std::to_string(sum) + ", outside [0.999, 1.001]");
        for (auto& p : block) p = static_cast<float>(p / sum);
    };

    std::vector<Sample> samples;
    std::size_t row = 1;  // header was row 1
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string where = path.string() + ": row " + std::to_string(row);

        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) fields.push_back(cell);
        if (!line.empty() && line.back() == ',') fields.push_back("");
        if (fields.size() != n_fields)
            throw ParseError(where + ": expected " + std::to_string(n_fields) + " fields, got " +
                             std::to_string(fields.size()));

        Sample s;
        s.adj_label = parse_index(fields[0], where);
        s.noun_label = parse_index(fields[1], where);
        s.anp_label = parse_index(fields[2], where);
        if (s.adj_label >= n_adj || s.noun_label >= n_noun || s.anp_label >= vocab.n_anp())
            throw ValueError(where + ": label out of range");
        const auto& pair = vocab.anps[s.anp_label];
        if (pair.first != s.adj_label || pair.second != s.noun_label)
            throw ValueError(where + ": adjective/noun labels disagree with the anp pairing");

        auto parse_prob = [&](const std::string& text) {
            try {
                std::size_t used = 0;
                const double v = std::stod(text, &used);
                if (used != text.size()) throw std::invalid_argument("trailing characters");
                if (!std::isfinite(v)) throw ValueError(where + ": non-finite probability");
                return static_cast<float>(v);
            } catch (const ValueError&) {
                throw;
            } catch (const std::exception&) {
                throw ParseError(where + ": cannot parse probability '" + text + "'");
            }
        };
        s.adj_probs.reserve(n_adj);
        for (std::size_t i = 0; i < n_adj; ++i) s.adj_probs.push_back(parse_prob(fields[3 + i]));
        s.noun_probs.reserve(n_noun);
        for (std::size_t i = 0; i < n_noun; ++i)
            s.noun_probs.push_back(parse_prob(fields[3 + n_adj + i]));
        normalize_block(s.adj_probs, row);
        normalize_block(s.noun_probs, row);
        samples.push_back(std::move(s));
    }
    return samples;
}

std::pair<std::vector<Sample>, std::vector<Sample>> stratified_split(
    const std::vector<Sample>& samples, std::uint32_t n_anp, double train_fraction,
    std::uint64_t seed) {
    if (train_fraction <= 0.0 || train_fraction >= 1.0)
        throw ValueError("stratified_split: train_fraction must lie in (0, 1)");
    std::vector<std::vector<std::size_t>> per_class(n_anp);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].anp_label >= n_anp)
            throw ValueError("stratified_split: anp label out of range at sample " + std::to_string(i));
        per_class[samples[i].anp_label].push_back(i);
    }
    for (std::uint32_t c = 0; c < n_anp; ++c)
        if (!per_class[c].empty() && per_class[c].size() < 2)
            throw ValueError("stratified_split: anp class " + std::to_string(c) +
                             " has fewer than 2 samples");

    Rng rng(seed);
    std::vector<Sample> train, test;
    for (std::uint32_t c = 0; c < n_anp; ++c) {
        auto& idx = per_class[c];
        if (idx.empty()) continue;
        shuffle(idx, rng);
        std::size_t n_train = static_cast<std::size_t>(
            std::floor(train_fraction * static_cast<double>(idx.size())));
        if (n_train < 1) n_train = 1;
        for (std::size_t i = 0; i < idx.size(); ++i)
            (i < n_train ? train : test).push_back(samples[idx[i]]);
    }
    return {std::move(train), std::move(test)};
}

std::pair<Vocabulary, std::vector<Sample>> synth_generate(const SynthConfig& config) {
    if (config.n_adj < 1 || config.n_noun < 1)
        throw ValueError("synth_generate: vocabulary dimensions must be >= 1");
    if (config.samples_per_anp < 1) throw ValueError("synth_generate: samples_per_anp must be >= 1");
    if (!(config.noise_temp > 0.0)) throw ValueError("synth_generate: noise_temp must be positive");

    Vocabulary vocab;
    for (std::uint32_t a = 0; a < config.n_adj; ++a) vocab.adjectives.push_back("adj" + std::to_string(a));
    for (std::uint32_t n = 0; n < config.n_noun; ++n) vocab.nouns.push_back("noun" + std::to_string(n));
    if (config.anps.empty()) {
        for (std::uint32_t a = 0; a < config.n_adj; ++a)
            for (std::uint32_t n = 0; n < config.n_noun; ++n) vocab.anps.emplace_back(a, n);
    } else {
        std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
        for (const auto& [a, n] : config.anps) {
            if (a >= config.n_adj || n >= config.n_noun)
                throw ValueError("synth_generate: anp pair references an out-of-range token");
            if (!seen.insert({a, n}).second) throw ValueError("synth_generate: duplicate anp pair");
            vocab.anps.emplace_back(a, n);
        }
    }
    const std::size_t n_anp = vocab.n_anp();

    auto resolve_signal = [&](const std::vector<double>& sig, const char* name) {
        if (sig.size() == 1) return std::vector<double>(n_anp, sig[0]);
        if (sig.size() != n_anp)
            throw ValueError(std::string("synth_generate: ") + name + " must have 1 or " +
                             std::to_string(n_anp) + " entries, got " + std::to_string(sig.size()));
        return sig;
    };
    const auto adj_signal = resolve_signal(config.adj_signal, "adj_signal");
    const auto noun_signal = resolve_signal(config.noun_signal, "noun_signal");
    for (const double s : adj_signal)
        if (!(s >= 0.0) || !std::isfinite(s)) throw ValueError("synth_generate: adj_signal must be finite and >= 0");
    for (const double s : noun_signal)
        if (!(s >= 0.0) || !std::isfinite(s)) throw ValueError("synth_generate: noun_signal must be finite and >= 0");

    // ANPs in a duplicate pair (a, b) share a's generator: b's samples are
    // drawn with a's boost positions and signal strengths. Chains resolve to
    // their representative regardless of pair order.
    std::vector<std::uint32_t> generator(n_anp);
    for (std::size_t c = 0; c < n_anp; ++c) generator[c] = static_cast<std::uint32_t>(c);
    auto resolve = [&](std::uint32_t c) {
        while (generator[c] != c) c = generator[c];
        return c;
    };
    for (const auto& [a, b] : config.duplicate_pairs) {
        if (a >= n_anp || b >= n_anp)
            throw ValueError("synth_generate: duplicate_pairs index out of range");
        if (a == b) throw ValueError("synth_generate: duplicate_pairs entry pairs an anp with itself");
        generator[b] = resolve(a);
    }
    for (std::size_t c = 0; c < n_anp; ++c) generator[c] = resolve(static_cast<std::uint32_t>(c));

    Rng rng(config.seed);
    std::vector<Sample> samples;
    samples.reserve(n_anp * config.samples_per_anp);

    auto draw_probs = [&](std::size_t dim, std::size_t boost_at, double signal) {
        std::vector<double> logits(dim);
        for (std::size_t d = 0; d < dim; ++d) {
            double z = rng.gaussian();
            if (d == boost_at) z += signal;
            logits[d] = z / config.noise_temp;
        }
        const auto probs = softmax(logits);
        std::vector<float> out(dim);
        for (std::size_t d = 0; d < dim; ++d) out[d] = static_cast<float>(probs[d]);
        return out;
    };

    for (std::size_t c = 0; c < n_anp; ++c) {
        const auto [adj_label, noun_label] = vocab.anps[c];
        const std::uint32_t g = generator[c];
        const auto [boost_adj, boost_noun] = vocab.anps[g];
        for (std::uint32_t s = 0; s < config.samples_per_anp; ++s) {
            Sample sample;
            sample.adj_label = adj_label;
            sample.noun_label = noun_label;
            sample.anp_label = static_cast<std::uint32_t>(c);
            sample.adj_probs = draw_probs(config.n_adj, boost_adj, adj_signal[g]);
            sample.noun_probs = draw_probs(config.n_noun, boost_noun, noun_signal[g]);
            samples.push_back(std::move(sample));
        }
    }
    return {std::move(vocab), std::move(samples)};
}

SynthConfig parse_synth_config(const std::filesystem::path& path) {
    KvConfig kv = KvConfig::parse_file(path);
    SynthConfig cfg;
    cfg.n_adj = kv.require_u32("n_adj");
    cfg.n_noun = kv.require_u32("n_noun");
    cfg.samples_per_anp = kv.require_u32("samples_per_anp");
    cfg.seed = kv.require_u64("seed");
    cfg.adj_signal = parse_double_list(kv.require_string("adj_signal"), "adj_signal");
    cfg.noun_signal = parse_double_list(kv.require_string("noun_signal"), "noun_signal");
    cfg.noise_temp = kv.get_double("noise_temp", 1.0);
    if (kv.has("anps")) cfg.anps = parse_pair_list(kv.require_string("anps"), "anps");
    if (kv.has("duplicate_pairs")) {
        const std::string text = kv.require_string("duplicate_pairs");
        if (!text.empty()) cfg.duplicate_pairs = parse_pair_list(text, "duplicate_pairs");
    }
    kv.finish();
    return cfg;
}

}  // namespace anp
