#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>

#include "anp/errors.hpp"

namespace anp {

// Locale-independent fixed-point rendering; CSV output must be byte-stable
// across runs.
inline std::string format_fixed(double value, int precision = 6) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed, precision);
    return std::string(buf, res.ptr);
}

// Minimal writer: caller composes rows cell by cell, values are assumed not
// to need quoting (names in this project never contain commas).
class CsvWriter {
public:
    explicit CsvWriter(const std::filesystem::path& path) : out_(path, std::ios::binary) {
        if (!out_) throw IoError("cannot open for writing: " + path.string());
        path_ = path.string();
    }

    CsvWriter& cell(const std::string& value) {
        if (!first_) out_ << ',';
        out_ << value;
        first_ = false;
        return *this;
    }
    CsvWriter& cell(const char* value) { return cell(std::string(value)); }
    CsvWriter& cell(std::uint64_t value) { return cell(std::to_string(value)); }
    CsvWriter& cell(std::int64_t value) { return cell(std::to_string(value)); }
    CsvWriter& cell(double value, int precision = 6) { return cell(format_fixed(value, precision)); }
    CsvWriter& empty_cell() { return cell(std::string()); }

    void end_row() {
        out_ << '\n';
        first_ = true;
    }

    void close() {
        out_.close();
        if (!out_) throw IoError("write failed: " + path_);
    }

private:
    std::ofstream out_;
    std::string path_;
    bool first_ = true;
};

}  // namespace anp
