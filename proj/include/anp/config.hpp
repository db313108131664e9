#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "anp/errors.hpp"

namespace anp {

// "key = value" lines, '#' comments, blank lines ignored. Lookups mark keys
// as consumed; finish() rejects leftovers so typos surface instead of being
// silently ignored.
class KvConfig {
public:
    static KvConfig parse_file(const std::filesystem::path& path);
    static KvConfig parse_string(const std::string& text, const std::string& origin);

    std::string require_string(const std::string& key);
    std::uint32_t require_u32(const std::string& key);
    std::uint64_t require_u64(const std::string& key);
    double require_double(const std::string& key);

    std::string get_string(const std::string& key, std::string fallback);
    double get_double(const std::string& key, double fallback);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    void finish() const;

private:
    std::string origin_;
    std::map<std::string, std::string> values_;
    std::set<std::string> consumed_;

    const std::string* lookup(const std::string& key);
};

// Comma-separated doubles: "4,1,0.5".
std::vector<double> parse_double_list(const std::string& text, const std::string& what);

// Comma-separated index pairs: "0:3,1:2".
std::vector<std::pair<std::uint32_t, std::uint32_t>> parse_pair_list(const std::string& text,
                                                                     const std::string& what);

}  // namespace anp
