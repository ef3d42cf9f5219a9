#pragma once

#include <string>

#include "duplex/cli/config.hpp"
#include "duplex/cli/table.hpp"

namespace duplex::cli {

extern const char* const kToolVersion;

// Runs the configured sweep or contract job.  The table carries the config
// hash, seed and version; wall time is added under "wall_time_s".
ResultTable run_experiment(const ExperimentConfig& cfg);

// Writes the table to cfg.output; throws ConfigError when it cannot.
void write_result(const ExperimentConfig& cfg, const ResultTable& table);

// Column label: method, then "@variable=value" when a series is set.
std::string column_name(const std::string& method, const Series& series, double value);

}  // namespace duplex::cli
