#include "anp/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace anp {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

KvConfig KvConfig::parse_string(const std::string& text, const std::string& origin) {
    KvConfig cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ParseError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty())
            throw ParseError(origin + ":" + std::to_string(lineno) + ": empty key");
        if (cfg.values_.count(key))
            throw ParseError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
        cfg.values_[key] = value;
    }
    return cfg;
}

KvConfig KvConfig::parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path.string());
}

const std::string* KvConfig::lookup(const std::string& key) {
    const auto it = values_.find(key);
    if (it == values_.end()) return nullptr;
    consumed_.insert(key);
    return &it->second;
}

std::string KvConfig::require_string(const std::string& key) {
    const std::string* v = lookup(key);
    if (!v) throw ParseError(origin_ + ": missing required key '" + key + "'");
    return *v;
}

std::uint32_t KvConfig::require_u32(const std::string& key) {
    const std::uint64_t v = require_u64(key);
    if (v > 0xffffffffULL)
        throw ParseError(origin_ + ": key '" + key + "' is too large");
    return static_cast<std::uint32_t>(v);
}

std::uint64_t KvConfig::require_u64(const std::string& key) {
    const std::string text = require_string(key);
    if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos)
        throw ParseError(origin_ + ": key '" + key + "' must be a non-negative integer, got '" + text + "'");
    try {
        return std::stoull(text);
    } catch (const std::exception&) {
        throw ParseError(origin_ + ": key '" + key + "' is out of range: '" + text + "'");
    }
}

double KvConfig::require_double(const std::string& key) {
    const std::string text = require_string(key);
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument("trailing characters");
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite");
        return v;
    } catch (const std::exception&) {
        throw ParseError(origin_ + ": key '" + key + "' must be a finite number, got '" + text + "'");
    }
}

std::string KvConfig::get_string(const std::string& key, std::string fallback) {
    const std::string* v = lookup(key);
    return v ? *v : std::move(fallback);
}

double KvConfig::get_double(const std::string& key, double fallback) {
    if (!values_.count(key)) return fallback;
    return require_double(key);
}

void KvConfig::finish() const {
    for (const auto& [key, value] : values_) {
        (void)value;
        if (!consumed_.count(key))
            throw ParseError(origin_ + ": unknown key '" + key + "'");
    }
}

std::vector<double> parse_double_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            std::size_t used = 0;
            const std::string trimmed = cell;
            const double v = std::stod(trimmed, &used);
            while (used < trimmed.size() && std::isspace(static_cast<unsigned char>(trimmed[used]))) ++used;
            if (used != trimmed.size()) throw std::invalid_argument("trailing characters");
            out.push_back(v);
        } catch (const std::exception&) {
            throw ParseError(what + ": cannot parse number '" + cell + "'");
        }
    }
    if (out.empty()) throw ParseError(what + ": empty list");
    return out;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> parse_pair_list(const std::string& text,
                                                                     const std::string& what) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
    std::stringstream ss(text);
    std::string cell;
    auto parse_u32 = [&](const std::string& t) {
        if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos)
            throw ParseError(what + ": expected a non-negative integer, got '" + t + "'");
        const unsigned long v = std::stoul(t);
        if (v > 0xffffffffUL) throw ParseError(what + ": index too large: '" + t + "'");
        return static_cast<std::uint32_t>(v);
    };
    while (std::getline(ss, cell, ',')) {
        const auto colon = cell.find(':');
        if (colon == std::string::npos)
            throw ParseError(what + ": expected 'a:b', got '" + cell + "'");
        out.emplace_back(parse_u32(cell.substr(0, colon)), parse_u32(cell.substr(colon + 1)));
    }
    if (out.empty()) throw ParseError(what + ": empty list");
    return out;
}

}  // namespace anp
