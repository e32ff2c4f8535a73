#include "prom/io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace prom::io {

namespace {

constexpr char kMagic[8] = {'P', 'R', 'O', 'M', 'D', 'A', 'T', '1'};

void put_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

void write_promdat(const std::filesystem::path& path, const Mat& m) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("promdat: cannot open " + path.string() + " for writing");
    os.write(kMagic, 8);
    put_u64(os, m.rows());
    put_u64(os, m.cols());
    for (std::size_t i = 0; i < m.size(); ++i) {
        std::uint64_t bits;
        std::memcpy(&bits, m.data() + i, 8);
        put_u64(os, bits);
    }
    if (!os) throw std::runtime_error("promdat: write failed for " + path.string());
}

Mat read_promdat(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("promdat: cannot open " + path.string());
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("promdat: bad magic in " + path.string());
    const std::uint64_t rows = get_u64(is);
    const std::uint64_t cols = get_u64(is);
    Mat m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) {
        const std::uint64_t bits = get_u64(is);
        std::memcpy(m.data() + i, &bits, 8);
    }
    if (!is) throw std::runtime_error("promdat: truncated file " + path.string());
    return m;
}

void write_promdat_atomic(const std::filesystem::path& path, const Mat& m,
                          const std::string& meta) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    write_promdat(tmp, m);
    {
        std::ofstream ms(tmp.string() + ".meta", std::ios::trunc);
        ms << meta;
        if (!ms) throw std::runtime_error("promdat: meta write failed for " + path.string());
    }
    std::filesystem::rename(tmp.string() + ".meta", path.string() + ".meta");
    std::filesystem::rename(tmp, path);
}

std::string fmt_g17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

Config Config::parse_string(const std::string& text) {
    Config cfg;
    std::istringstream is(text);
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == ';' || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw std::runtime_error("config: malformed section at line " +
                                         std::to_string(lineno));
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config: expected key = value at line " +
                                     std::to_string(lineno));
        cfg.data_[section][trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
    return cfg;
}

Config Config::parse_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("config: cannot open " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_string(ss.str());
}

bool Config::has(const std::string& section, const std::string& key) const {
    const auto s = data_.find(section);
    return s != data_.end() && s->second.count(key) != 0;
}

const std::string& Config::get(const std::string& section, const std::string& key) const {
    const auto s = data_.find(section);
    if (s != data_.end()) {
        const auto k = s->second.find(key);
        if (k != s->second.end()) return k->second;
    }
    throw std::runtime_error("config: missing [" + section + "] " + key);
}

std::string Config::get_or(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
    return has(section, key) ? get(section, key) : fallback;
}

double Config::get_double(const std::string& section, const std::string& key) const {
    const std::string& v = get(section, key);
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw std::runtime_error("config: [" + section + "] " + key + " is not a number: " + v);
    }
}

double Config::get_double_or(const std::string& section, const std::string& key,
                             double fallback) const {
    return has(section, key) ? get_double(section, key) : fallback;
}

std::size_t Config::get_size(const std::string& section, const std::string& key) const {
    const double x = get_double(section, key);
    if (x < 0 || x != static_cast<double>(static_cast<std::size_t>(x)))
        throw std::runtime_error("config: [" + section + "] " + key +
                                 " must be a nonnegative integer");
    return static_cast<std::size_t>(x);
}

std::size_t Config::get_size_or(const std::string& section, const std::string& key,
                                std::size_t fallback) const {
    return has(section, key) ? get_size(section, key) : fallback;
}

bool Config::get_bool_or(const std::string& section, const std::string& key,
                         bool fallback) const {
    if (!has(section, key)) return fallback;
    const std::string& v = get(section, key);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::runtime_error("config: [" + section + "] " + key + " is not a boolean: " + v);
}

}  // namespace prom::io
