#include "duplex/cli/table.hpp"

#include <charconv>
#include <cstdio>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "duplex/error.hpp"

namespace duplex::cli {

void ResultTable::set_meta(const std::string& key, const std::string& value) {
    if (key.find(':') != std::string::npos || key.find('\n') != std::string::npos ||
        value.find('\n') != std::string::npos)
        throw ConfigError("table metadata must be single-line and keys may not contain ':'");
    for (auto& kv : metadata)
        if (kv.first == key) {
            kv.second = value;
            return;
        }
    metadata.emplace_back(key, value);
}

std::string ResultTable::meta(const std::string& key) const {
    for (const auto& kv : metadata)
        if (kv.first == key) return kv.second;
    return {};
}

void ResultTable::validate() const {
    if (headers.empty()) throw ConfigError("result table has no columns");
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != headers.size())
            throw ConfigError("result table row " + std::to_string(r) + " has the wrong width");
        for (double v : rows[r])
            if (std::isnan(v)) throw NumericalError("result table row " + std::to_string(r) + " has a missing cell");
    }
}

std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_csv(std::ostream& out, const ResultTable& table) {
    table.validate();
    for (const auto& [k, v] : table.metadata) out << "# " << k << ": " << v << '\n';
    for (std::size_t c = 0; c < table.headers.size(); ++c) out << (c ? "," : "") << table.headers[c];
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_number(row[c]);
        out << '\n';
    }
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

double parse_number(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ConfigError("csv: bad number '" + s + "'");
    return v;
}

}  // namespace

ResultTable read_csv(std::istream& in) {
    ResultTable t;
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto colon = line.find(':');
            if (colon == std::string::npos || line.size() < 2) throw ConfigError("csv: bad metadata line");
            const std::string value = colon + 2 <= line.size() ? line.substr(colon + 2) : std::string();
            t.metadata.emplace_back(line.substr(2, colon - 2), value);
            continue;
        }
        if (!header) {
            t.headers = split(line);
            header = true;
            continue;
        }
        std::vector<double> row;
        for (const auto& cell : split(line)) row.push_back(parse_number(cell));
        t.rows.push_back(std::move(row));
    }
    if (!header) throw ConfigError("csv: no header line");
    t.validate();
    return t;
}

std::uint64_t fnv1a(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace duplex::cli
