#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace duplex::cli {

struct ResultTable {
    std::vector<std::string> headers;
    std::vector<std::vector<double>> rows;
    std::vector<std::pair<std::string, std::string>> metadata;

    void set_meta(const std::string& key, const std::string& value);
    // Empty when absent.
    std::string meta(const std::string& key) const;

    // Every row full width, no NaN cells.
    void validate() const;
};

// '#'-prefixed "key: value" lines, a header line, then rows.  Numbers use the
// shortest representation that reads back exactly.
void write_csv(std::ostream& out, const ResultTable& table);
ResultTable read_csv(std::istream& in);

std::string format_number(double v);

// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& data);
std::string hex64(std::uint64_t v);

}  // namespace duplex::cli
