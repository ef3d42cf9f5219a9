#pragma once

#include <string>
#include <vector>

namespace duplex::cli {

struct Preset {
    std::string name;
    std::string text;  // JSON document
};

// Configs shipped in presets/, compiled in.  Excludes the schema.
const std::vector<Preset>& presets();
// Throws ConfigError for an unknown name.
const Preset& preset(const std::string& name);
// The bundled JSON Schema for config files.
const std::string& config_schema();

}  // namespace duplex::cli
