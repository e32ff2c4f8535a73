#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "prom/matrix.hpp"

// Serialization: the PROMDAT1 matrix container (bit-exact doubles,
// little-endian), a small INI-style config reader, and numeric formatting
// helpers shared by every CSV writer.

namespace prom::io {

// layout: 8-byte magic "PROMDAT1", u64 rows, u64 cols, then rows*cols
// IEEE-754 doubles, row-major, everything little-endian
void write_promdat(const std::filesystem::path& path, const Mat& m);
Mat read_promdat(const std::filesystem::path& path);

// writes <path> plus a <path>.meta text sidecar, via a temp file + rename so
// concurrent readers never observe a partial matrix
void write_promdat_atomic(const std::filesystem::path& path, const Mat& m,
                          const std::string& meta);

// shortest round-trip decimal representation used by every CSV column
std::string fmt_g17(double x);

class Config {
public:
    static Config parse_file(const std::filesystem::path& path);
    static Config parse_string(const std::string& text);

    bool has(const std::string& section, const std::string& key) const;
    const std::string& get(const std::string& section, const std::string& key) const;
    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key) const;
    double get_double_or(const std::string& section, const std::string& key,
                         double fallback) const;
    std::size_t get_size(const std::string& section, const std::string& key) const;
    std::size_t get_size_or(const std::string& section, const std::string& key,
                            std::size_t fallback) const;
    bool get_bool_or(const std::string& section, const std::string& key, bool fallback) const;

private:
    std::map<std::string, std::map<std::string, std::string>> data_;
};

}  // namespace prom::io
