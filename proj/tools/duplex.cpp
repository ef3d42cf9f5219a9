// Command-line front end: analyze, verify, contract train/infer, presets.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "duplex/cli/config.hpp"
#include "duplex/cli/experiments.hpp"
#include "duplex/cli/presets.hpp"
#include "duplex/cli/verify.hpp"
#include "duplex/error.hpp"

using namespace duplex;
using nlohmann::json;

namespace {

struct Overrides {
    std::optional<std::string> output;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> samples;
    std::optional<int> episodes;
    std::optional<std::string> checkpoint;
};

std::string config_text(const std::string& path_or_preset) {
    if (std::filesystem::is_regular_file(path_or_preset)) {
        std::ifstream in(path_or_preset);
        std::stringstream ss;
        ss << in.rdbuf();
        if (!in) throw ConfigError("cannot read config " + path_or_preset);
        return ss.str();
    }
    for (const auto& p : cli::presets())
        if (p.name == path_or_preset) return p.text;
    throw ConfigError("no config file or preset named '" + path_or_preset + "' (see 'presets list')");
}

cli::ExperimentConfig load(const std::string& path_or_preset, const Overrides& o) {
    json doc;
    try {
        doc = json::parse(config_text(path_or_preset));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (o.output) doc["output"] = *o.output;
    if (o.seed) doc["seed"] = *o.seed;
    if (o.samples) doc["monte_carlo_samples"] = *o.samples;
    if (o.episodes) doc["training"]["episodes"] = *o.episodes;
    if (o.checkpoint) doc["checkpoint"] = *o.checkpoint;
    return cli::parse_config(doc.dump());
}

int run(const cli::ExperimentConfig& cfg) {
    const cli::ResultTable t = cli::run_experiment(cfg);
    cli::write_result(cfg, t);
    std::cout << "wrote " << cfg.output << " (" << t.rows.size() << " rows, " << t.meta("wall_time_s") << " s)\n";
    for (const char* key : {"inferred_u_sir", "oracle_u_sir", "policy_mean_u_sir", "random_baseline_u_sir", "all_passed"})
        if (!t.meta(key).empty()) std::cout << key << ": " << t.meta(key) << "\n";
    return 0;
}

void require(const cli::ExperimentConfig& cfg, cli::ExperimentId id) {
    if (cfg.id != id)
        throw ConfigError(std::string("expected a ") + cli::to_string(id) + " config, got " + cli::to_string(cfg.id));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Full-duplex link analysis and contract design"};
    app.set_version_flag("--version", cli::kToolVersion);
    app.require_subcommand(1);

    Overrides o;
    std::string config;

    auto* analyze = app.add_subcommand("analyze", "Run an experiment config (file path or preset name)");
    analyze->add_option("config", config, "Config file or preset")->required();
    analyze->add_option("--output,-o", o.output, "Override the output CSV path");
    analyze->add_option("--seed", o.seed, "Override the seed");
    analyze->add_option("--samples", o.samples, "Override the Monte Carlo sample count");

    std::string battery = "default";
    std::vector<std::string> tolerances;
    std::vector<std::string> only;
    std::string report_path;
    std::uint64_t verify_seed = 0;
    auto* verify = app.add_subcommand("verify", "Run the invariant battery");
    verify->add_option("--battery", battery, "default or full")->check(CLI::IsMember({"default", "full"}));
    verify->add_option("--tol", tolerances, "Tolerance override, name=value (repeatable)");
    verify->add_option("--check", only, "Run only this check (repeatable)");
    verify->add_option("--report", report_path, "Write a JSON report");
    verify->add_option("--seed", verify_seed, "Seed for randomized checks");

    auto* contract = app.add_subcommand("contract", "Train or query the contract policy");
    contract->require_subcommand(1);
    auto* train = contract->add_subcommand("train", "Train and save a checkpoint");
    train->add_option("config", config, "contract_train config or preset")->required();
    train->add_option("--output,-o", o.output, "Override the output CSV path");
    train->add_option("--checkpoint", o.checkpoint, "Override the checkpoint path");
    train->add_option("--episodes", o.episodes, "Override the episode count");
    train->add_option("--seed", o.seed, "Override the training seed");
    std::string checkpoint;
    auto* infer = contract->add_subcommand("infer", "Infer contracts from a checkpoint");
    infer->add_option("checkpoint", checkpoint, "Checkpoint file")->required();
    infer->add_option("config", config, "contract_eval config or preset")->required();
    infer->add_option("--output,-o", o.output, "Override the output CSV path");

    auto* presets = app.add_subcommand("presets", "Bundled configs");
    presets->require_subcommand(1);
    auto* list = presets->add_subcommand("list", "List preset names");
    std::string name;
    auto* show = presets->add_subcommand("show", "Print a preset");
    show->add_option("name", name, "Preset name")->required();
    auto* schema = presets->add_subcommand("schema", "Print the config JSON Schema");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*analyze) return run(load(config, o));
        if (*train) {
            const auto cfg = load(config, o);
            require(cfg, cli::ExperimentId::contract_train);
            return run(cfg);
        }
        if (*infer) {
            o.checkpoint = checkpoint;
            const auto cfg = load(config, o);
            require(cfg, cli::ExperimentId::contract_eval);
            return run(cfg);
        }
        if (*verify) {
            cli::VerifyOptions opt;
            opt.battery = battery;
            opt.seed = verify_seed;
            opt.checks = only;
            for (const auto& t : tolerances) {
                const auto eq = t.find('=');
                if (eq == std::string::npos) throw ConfigError("--tol expects name=value, got '" + t + "'");
                try {
                    opt.tolerances[t.substr(0, eq)] = std::stod(t.substr(eq + 1));
                } catch (const std::logic_error&) {
                    throw ConfigError("--tol: bad number in '" + t + "'");
                }
            }
            const cli::VerifyReport report = cli::verify(opt);
            for (const auto& c : report.checks)
                std::printf("%-4s %-24s %11.3e %s %9.3e  %7.2f s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(),
                            c.statistic, c.passed ? "<=" : "> ", c.tolerance, c.seconds);
            std::printf("%s: %zu checks in %.1f s\n", report.passed() ? "PASS" : "FAIL", report.checks.size(),
                        report.wall_time_s);
            if (!report_path.empty()) {
                std::ofstream out(report_path);
                out << cli::report_json(report) << "\n";
                if (!out) throw ConfigError("cannot write " + report_path);
            }
            return report.passed() ? 0 : 1;
        }
        if (*list) {
            for (const auto& p : cli::presets()) std::cout << p.name << "\n";
            return 0;
        }
        if (*show) {
            std::cout << cli::preset(name).text;
            return 0;
        }
        if (*schema) {
            std::cout << cli::config_schema();
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
