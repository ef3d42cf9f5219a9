#include "duplex/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "duplex/channel/units.hpp"
#include "duplex/cli/presets.hpp"
#include "duplex/error.hpp"

namespace duplex::cli {

using nlohmann::json;

namespace {

const std::vector<std::pair<ExperimentId, const char*>> kIds = {
    {ExperimentId::fig6, "fig6"},
    {ExperimentId::fig8, "fig8"},
    {ExperimentId::fig9, "fig9"},
    {ExperimentId::fig10, "fig10"},
    {ExperimentId::fig11, "fig11"},
    {ExperimentId::contract_train, "contract_train"},
    {ExperimentId::contract_eval, "contract_eval"},
    {ExperimentId::verify, "verify"},
};

bool is_sweep(ExperimentId id) {
    return id == ExperimentId::fig6 || id == ExperimentId::fig8 || id == ExperimentId::fig9 ||
           id == ExperimentId::fig10 || id == ExperimentId::fig11;
}

std::vector<std::string> allowed_methods(ExperimentId id) {
    switch (id) {
        case ExperimentId::fig6:
            return {"exact", "asymptotic", "monte_carlo", "full_model"};
        case ExperimentId::fig8:
        case ExperimentId::fig9:
        case ExperimentId::fig10:
        case ExperimentId::fig11:
            return {"closed_form", "interference_limited", "quadrature", "monte_carlo"};
        default:
            return {};
    }
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [k, v] : obj.items())
        if (!allowed.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
}

double number(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
    const json& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(where + "." + key + ": not finite");
    return d;
}

std::uint64_t count(const json& v, const std::string& where) {
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw ConfigError(where + ": expected a non-negative integer");
    return v.get<std::uint64_t>();
}

}  // namespace

const char* to_string(ExperimentId id) {
    for (const auto& [k, name] : kIds)
        if (k == id) return name;
    return "?";
}

ExperimentId experiment_from_string(const std::string& name) {
    for (const auto& [k, n] : kIds)
        if (name == n) return k;
    throw ConfigError("unknown experiment '" + name + "'");
}

std::vector<double> Sweep::points() const {
    if (!(step > 0.0) || !(stop >= start)) throw ConfigError("sweep: need step > 0 and stop >= start");
    const double span = (stop - start) / step;
    if (span > 1e5) throw ConfigError("sweep: more than 10^5 points");
    const long n = static_cast<long>(std::floor(span + 1e-9)) + 1;
    std::vector<double> out;
    for (long k = 0; k < n; ++k) out.push_back(start + static_cast<double>(k) * step);
    return out;
}

const std::vector<std::string>& parameter_names() {
    static const std::vector<std::string> names = {
        "qos_value",      "power_cost",  "distance_m",      "path_loss_exponent",   "alpha",
        "mu",             "mean_power",  "noise_variance",  "si_variance",          "si_cancellation",
        "interferer_power_dbw", "interference_scale", "interferer_count", "peer_power_dbw", "bandwidth_hz",
        "own_power_dbw"};
    return names;
}

void set_parameter(channel::Environment& env, Watts& own_power, const std::string& name, double value) {
    if (!std::isfinite(value)) throw ConfigError(name + ": not finite");
    const channel::FadingParams& f = env.fading;
    if (name == "qos_value") env.qos_value = value;
    else if (name == "power_cost") env.power_cost = value;
    else if (name == "distance_m") env.distance_m = value;
    else if (name == "path_loss_exponent") env.path_loss_exponent = value;
    else if (name == "alpha") env.fading = channel::FadingParams(value, f.mu(), f.mean_power());
    else if (name == "mu") env.fading = channel::FadingParams(f.alpha(), value, f.mean_power());
    else if (name == "mean_power") env.fading = channel::FadingParams(f.alpha(), f.mu(), value);
    else if (name == "noise_variance") env.noise_variance = value;
    else if (name == "si_variance") env.si_variance = value;
    else if (name == "si_cancellation") env.si_cancellation = value;
    else if (name == "interferer_power_dbw") env.interferer_power = dbw_to_watts(value);
    else if (name == "interference_scale") env.interference_scale = value;
    else if (name == "interferer_count") {
        if (value != std::floor(value) || value < 1.0 || value > 1e6)
            throw ConfigError("interferer_count must be a positive integer");
        env.interferer_count = static_cast<int>(value);
    } else if (name == "peer_power_dbw") env.peer_power = dbw_to_watts(value);
    else if (name == "bandwidth_hz") env.bandwidth_hz = value;
    else if (name == "own_power_dbw") own_power = dbw_to_watts(value);
    else throw ConfigError("unknown parameter '" + name + "'");
}

double get_parameter(const channel::Environment& env, Watts own_power, const std::string& name) {
    if (name == "qos_value") return env.qos_value;
    if (name == "power_cost") return env.power_cost;
    if (name == "distance_m") return env.distance_m;
    if (name == "path_loss_exponent") return env.path_loss_exponent;
    if (name == "alpha") return env.fading.alpha();
    if (name == "mu") return env.fading.mu();
    if (name == "mean_power") return env.fading.mean_power();
    if (name == "noise_variance") return env.noise_variance;
    if (name == "si_variance") return env.si_variance;
    if (name == "si_cancellation") return env.si_cancellation;
    if (name == "interferer_power_dbw") return watts_to_dbw(env.interferer_power);
    if (name == "interference_scale") return env.interference_scale;
    if (name == "interferer_count") return env.interferer_count;
    if (name == "peer_power_dbw") return watts_to_dbw(env.peer_power);
    if (name == "bandwidth_hz") return env.bandwidth_hz;
    if (name == "own_power_dbw") return watts_to_dbw(own_power);
    throw ConfigError("unknown parameter '" + name + "'");
}

std::vector<std::string> default_methods(ExperimentId id) {
    if (id == ExperimentId::fig6) return allowed_methods(id);
    if (is_sweep(id)) return {"closed_form", "monte_carlo"};
    return {};
}

void ExperimentConfig::validate() const {
    env.validate();
    if (!(own_power.value >= 0.0)) throw ConfigError("own power must be non-negative");
    if (is_sweep(id)) {
        if (std::find(parameter_names().begin(), parameter_names().end(), sweep.variable) == parameter_names().end())
            throw ConfigError("sweep: unknown variable '" + sweep.variable + "'");
        sweep.points();
        if (!series.variable.empty()) {
            if (std::find(parameter_names().begin(), parameter_names().end(), series.variable) ==
                parameter_names().end())
                throw ConfigError("series: unknown variable '" + series.variable + "'");
            if (series.variable == sweep.variable) throw ConfigError("series: same variable as the sweep");
            if (series.values.empty()) throw ConfigError("series: no values");
        }
        const auto allowed = allowed_methods(id);
        if (methods.empty()) throw ConfigError("methods: none selected");
        for (const auto& m : methods)
            if (std::find(allowed.begin(), allowed.end(), m) == allowed.end())
                throw ConfigError("methods: '" + m + "' is not available for " + to_string(id));
        if (std::find(methods.begin(), methods.end(), "monte_carlo") != methods.end() && mc_samples < 10000)
            throw ConfigError("monte_carlo_samples must be at least 10^4");
        if (!(threshold > 0.0)) throw ConfigError("threshold must be positive");
        channel::modulation(modulation);
    }
    if (id == ExperimentId::contract_train || id == ExperimentId::contract_eval) {
        training.validate();
        if (id == ExperimentId::contract_train && checkpoint.empty())
            throw ConfigError("contract_train needs a checkpoint path");
        if (evaluation.seeds.empty()) throw ConfigError("evaluation: no seeds");
        if (evaluation.policy_samples == 0 || evaluation.baseline_samples == 0)
            throw ConfigError("evaluation: sample counts must be positive");
    }
    if (id == ExperimentId::verify && battery != "default" && battery != "full")
        throw ConfigError("battery must be 'default' or 'full'");
    if (!output.empty()) {
        const auto parent = std::filesystem::path(output).parent_path();
        if (!parent.empty() && !std::filesystem::is_directory(parent))
            throw ConfigError("output directory does not exist: " + parent.string());
    }
}

ExperimentConfig parse_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(doc,
               {"experiment", "description", "environment", "own_power_dbw", "sweep", "series", "methods",
                "threshold", "modulation", "monte_carlo_samples", "seed", "output", "battery", "training",
                "checkpoint", "evaluation"},
               "config");
    ExperimentConfig cfg;
    if (!doc.contains("experiment") || !doc.at("experiment").is_string())
        throw ConfigError("config: missing 'experiment'");
    cfg.id = experiment_from_string(doc.at("experiment").get<std::string>());

    if (cfg.id != ExperimentId::verify) {
        if (!doc.contains("environment")) throw ConfigError("config: missing 'environment'");
        const json& e = doc.at("environment");
        std::set<std::string> env_keys(parameter_names().begin(), parameter_names().end());
        env_keys.erase("own_power_dbw");
        check_keys(e, env_keys, "environment");
        // Fading shape first so that alpha, mu and mean_power combine.
        cfg.env.fading = channel::FadingParams(number(e, "alpha", "environment"), number(e, "mu", "environment"),
                                               number(e, "mean_power", "environment"));
        for (const auto& name : env_keys)
            if (name != "alpha" && name != "mu" && name != "mean_power")
                set_parameter(cfg.env, cfg.own_power, name, number(e, name, "environment"));
    }
    if (doc.contains("own_power_dbw"))
        set_parameter(cfg.env, cfg.own_power, "own_power_dbw", number(doc, "own_power_dbw", "config"));

    if (doc.contains("sweep")) {
        const json& s = doc.at("sweep");
        check_keys(s, {"variable", "start", "stop", "step"}, "sweep");
        if (!s.contains("variable") || !s.at("variable").is_string()) throw ConfigError("sweep: missing 'variable'");
        cfg.sweep = {s.at("variable").get<std::string>(), number(s, "start", "sweep"), number(s, "stop", "sweep"),
                     number(s, "step", "sweep")};
    } else if (is_sweep(cfg.id)) {
        throw ConfigError("config: missing 'sweep'");
    }
    if (doc.contains("series")) {
        const json& s = doc.at("series");
        check_keys(s, {"variable", "values"}, "series");
        if (!s.contains("variable") || !s.at("variable").is_string()) throw ConfigError("series: missing 'variable'");
        if (!s.contains("values") || !s.at("values").is_array()) throw ConfigError("series: missing 'values'");
        cfg.series.variable = s.at("variable").get<std::string>();
        for (const auto& v : s.at("values")) {
            if (!v.is_number()) throw ConfigError("series.values: expected numbers");
            cfg.series.values.push_back(v.get<double>());
        }
    }
    if (doc.contains("methods")) {
        if (!doc.at("methods").is_array()) throw ConfigError("methods: expected an array of names");
        for (const auto& m : doc.at("methods")) {
            if (!m.is_string()) throw ConfigError("methods: expected an array of names");
            cfg.methods.push_back(m.get<std::string>());
        }
    } else {
        cfg.methods = default_methods(cfg.id);
    }
    if (doc.contains("threshold")) cfg.threshold = number(doc, "threshold", "config");
    if (doc.contains("modulation")) cfg.modulation = doc.at("modulation").get<std::string>();
    if (doc.contains("monte_carlo_samples")) cfg.mc_samples = count(doc.at("monte_carlo_samples"), "monte_carlo_samples");
    if (doc.contains("seed")) cfg.seed = count(doc.at("seed"), "seed");
    if (doc.contains("output")) cfg.output = doc.at("output").get<std::string>();
    if (doc.contains("battery")) cfg.battery = doc.at("battery").get<std::string>();
    if (doc.contains("checkpoint")) cfg.checkpoint = doc.at("checkpoint").get<std::string>();

    cfg.training.seed = cfg.seed;
    if (doc.contains("training")) {
        const json& t = doc.at("training");
        check_keys(t,
                   {"diffusion_steps", "beta_first", "beta_last", "hidden", "batch_size", "gamma", "tau",
                    "explore_noise", "policy_lr", "critic_lr", "episodes", "steps_per_episode", "buffer_capacity",
                    "last_step_only", "encoding"},
                   "training");
        diffusion::TrainConfig& tc = cfg.training;
        auto integer = [&](const char* key, auto& field) {
            if (t.contains(key)) field = static_cast<std::remove_reference_t<decltype(field)>>(count(t.at(key), key));
        };
        auto real = [&](const char* key, double& field) {
            if (t.contains(key)) field = number(t, key, "training");
        };
        integer("diffusion_steps", tc.diffusion_steps);
        real("beta_first", tc.beta_first);
        real("beta_last", tc.beta_last);
        integer("hidden", tc.hidden);
        integer("batch_size", tc.batch_size);
        real("gamma", tc.gamma);
        real("tau", tc.tau);
        real("explore_noise", tc.explore_noise);
        real("policy_lr", tc.policy_lr);
        real("critic_lr", tc.critic_lr);
        integer("episodes", tc.episodes);
        integer("steps_per_episode", tc.steps_per_episode);
        integer("buffer_capacity", tc.buffer_capacity);
        if (t.contains("last_step_only")) tc.last_step_only = t.at("last_step_only").get<bool>();
        if (t.contains("encoding")) {
            const json& enc = t.at("encoding");
            const auto& names = diffusion::env_component_names();
            check_keys(enc, std::set<std::string>(names.begin(), names.end()), "training.encoding");
            for (std::size_t k = 0; k < names.size(); ++k)
                if (enc.contains(names[k])) {
                    const json& r = enc.at(names[k]);
                    if (!r.is_array() || r.size() != 2) throw ConfigError("training.encoding: expected [lo, hi]");
                    tc.encoding.ranges[k] = {r.at(0).get<double>(), r.at(1).get<double>()};
                }
        }
    }
    if (doc.contains("evaluation")) {
        const json& e = doc.at("evaluation");
        check_keys(e, {"seeds", "policy_samples", "baseline_samples"}, "evaluation");
        if (e.contains("seeds")) {
            cfg.evaluation.seeds.clear();
            for (const auto& s : e.at("seeds")) cfg.evaluation.seeds.push_back(count(s, "evaluation.seeds"));
        }
        if (e.contains("policy_samples")) cfg.evaluation.policy_samples = count(e.at("policy_samples"), "policy_samples");
        if (e.contains("baseline_samples"))
            cfg.evaluation.baseline_samples = count(e.at("baseline_samples"), "baseline_samples");
    }
    cfg.canonical = doc.dump();
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path_or_preset) {
    if (std::filesystem::is_regular_file(path_or_preset)) {
        std::ifstream in(path_or_preset);
        std::stringstream ss;
        ss << in.rdbuf();
        if (!in) throw ConfigError("cannot read config " + path_or_preset);
        return parse_config(ss.str());
    }
    for (const auto& p : presets())
        if (p.name == path_or_preset) return parse_config(p.text);
    throw ConfigError("no config file or preset named '" + path_or_preset + "'");
}

}  // namespace duplex::cli
