#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace duplex::cli {

struct CheckResult {
    std::string name;
    double statistic = 0.0;  // worst measured discrepancy
    double tolerance = 0.0;
    bool passed = false;     // statistic finite and <= tolerance
    double seconds = 0.0;
    std::string detail;
};

struct VerifyReport {
    std::string battery;
    std::uint64_t seed = 0;
    std::vector<CheckResult> checks;
    double wall_time_s = 0.0;

    bool passed() const;
};

struct VerifyOptions {
    std::string battery = "default";  // or "full"
    std::uint64_t seed = 0;
    std::map<std::string, double> tolerances;  // overrides by check name
    std::vector<std::string> checks;           // run only these; empty runs all
};

// Check names of a battery, in execution order.
std::vector<std::string> check_names(const std::string& battery);
double default_tolerance(const std::string& check);

// Throws ConfigError for an unknown battery or tolerance name.
VerifyReport verify(const VerifyOptions& options);

std::string report_json(const VerifyReport& report);

}  // namespace duplex::cli
