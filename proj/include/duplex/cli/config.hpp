#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "duplex/channel/model.hpp"
#include "duplex/diffusion/trainer.hpp"

namespace duplex::cli {

enum class ExperimentId { fig6, fig8, fig9, fig10, fig11, contract_train, contract_eval, verify };

const char* to_string(ExperimentId id);
ExperimentId experiment_from_string(const std::string& name);

struct Sweep {
    std::string variable;
    double start = 0.0;
    double stop = 0.0;
    double step = 1.0;

    // start, start + step, ... up to stop (inclusive within 1e-9 steps).
    std::vector<double> points() const;
};

// A parameter held at several values, one column group per value.
struct Series {
    std::string variable;  // empty: a single unnamed series
    std::vector<double> values;
};

struct Evaluation {
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
    std::size_t policy_samples = 200;
    std::size_t baseline_samples = 100000;
};

struct ExperimentConfig {
    ExperimentId id = ExperimentId::fig6;
    channel::Environment env;
    Watts own_power{1.0};
    Sweep sweep;
    Series series;
    std::vector<std::string> methods;
    double threshold = 1.0;
    std::string modulation = "BPSK";
    std::size_t mc_samples = 200000;
    std::uint64_t seed = 0;
    std::string output;
    std::string battery = "default";
    diffusion::TrainConfig training;
    std::string checkpoint;
    Evaluation evaluation;
    std::string canonical;  // the parsed document, compact and key-sorted

    void validate() const;
};

// Names accepted by set_parameter, in document order.
const std::vector<std::string>& parameter_names();

// The single dBW -> watt conversion point: *_dbw names are decibel-watts.
void set_parameter(channel::Environment& env, Watts& own_power, const std::string& name, double value);
double get_parameter(const channel::Environment& env, Watts own_power, const std::string& name);

// Throws ConfigError naming the offending key.
ExperimentConfig parse_config(const std::string& json_text);

// A file path, or the name of a bundled preset.
ExperimentConfig load_config(const std::string& path_or_preset);

// Methods run when the config lists none.
std::vector<std::string> default_methods(ExperimentId id);

}  // namespace duplex::cli
