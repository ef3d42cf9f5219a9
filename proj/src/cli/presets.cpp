#include "duplex/cli/presets.hpp"

#include <algorithm>

#include "duplex/error.hpp"

namespace duplex::cli {

// Generated from presets/*.json at configure time.
extern const std::vector<Preset> kBundledFiles;

const std::vector<Preset>& presets() {
    static const std::vector<Preset> list = [] {
        std::vector<Preset> out;
        for (const auto& p : kBundledFiles)
            if (p.name != "schema") out.push_back(p);
        std::sort(out.begin(), out.end(), [](const Preset& a, const Preset& b) { return a.name < b.name; });
        return out;
    }();
    return list;
}

const Preset& preset(const std::string& name) {
    for (const auto& p : presets())
        if (p.name == name) return p;
    throw ConfigError("unknown preset '" + name + "' (see 'presets list')");
}

const std::string& config_schema() {
    for (const auto& p : kBundledFiles)
        if (p.name == "schema") return p.text;
    throw ConfigError("the config schema was not bundled");
}

}  // namespace duplex::cli
