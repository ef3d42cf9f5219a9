#include "duplex/cli/experiments.hpp"

#include <chrono>
#include <fstream>
#include <memory>

#include "duplex/cli/verify.hpp"
#include "duplex/contract/contract.hpp"
#include "duplex/diffusion/trainer.hpp"
#include "duplex/error.hpp"
#include "duplex/parallel.hpp"
#include "duplex/perf/metrics.hpp"

namespace duplex::cli {

const char* const kToolVersion = DUPLEX_VERSION;

namespace {

using perf::DuplexMode;
using perf::EvalMethod;
using perf::OutageMethod;

std::uint64_t cell_seed(std::uint64_t seed, std::size_t cell) { return seed * 1000003ull + cell; }

EvalMethod eval_method(const std::string& name, std::size_t samples, std::uint64_t seed) {
    if (name == "closed_form") return EvalMethod::closed_form();
    if (name == "interference_limited") return EvalMethod::interference_limited();
    if (name == "quadrature") return EvalMethod::quadrature();
    if (name == "monte_carlo") return EvalMethod::monte_carlo(samples, seed);
    throw ConfigError("unknown method '" + name + "'");
}

double outage_cell(const ExperimentConfig& cfg, const channel::Environment& env, Watts own, const std::string& m,
                   std::uint64_t seed) {
    if (m == "exact") return perf::outage_probability(env, own, cfg.threshold, OutageMethod::interference_limited).value;
    if (m == "asymptotic") return perf::outage_probability(env, own, cfg.threshold, OutageMethod::asymptotic).value;
    if (m == "full_model") return perf::outage_probability(env, own, cfg.threshold, OutageMethod::exact).value;
    EvalMethod mc = EvalMethod::monte_carlo(cfg.mc_samples, seed);
    mc.mc.interference_limited = true;  // the same model as "exact"
    return perf::outage_probability(env, own, cfg.threshold, OutageMethod::monte_carlo, mc).value;
}

// Column groups per series value; each group lists the metric columns.
std::vector<std::string> metric_columns(const ExperimentConfig& cfg) {
    const bool rate = cfg.id == ExperimentId::fig10 || cfg.id == ExperimentId::fig11;
    std::vector<std::string> out;
    for (const auto& m : cfg.methods) {
        if (rate) {
            out.push_back(m + "_full");
            out.push_back(m + "_half");
        } else {
            out.push_back(m);
        }
    }
    return out;
}

ResultTable run_sweep(const ExperimentConfig& cfg) {
    const std::vector<double> points = cfg.sweep.points();
    const std::vector<double> series = cfg.series.variable.empty() ? std::vector<double>{0.0} : cfg.series.values;
    const std::vector<std::string> metrics = metric_columns(cfg);
    const std::size_t width = metrics.size();
    const auto& modulation = channel::modulation(cfg.modulation);

    ResultTable t;
    t.headers.push_back(cfg.sweep.variable);
    for (double s : series)
        for (const auto& m : metrics) t.headers.push_back(column_name(m, cfg.series, s));
    t.rows.assign(points.size(), std::vector<double>(1 + series.size() * width, 0.0));

    const std::size_t cells = points.size() * series.size();
    parallel_for(cells, [&](std::size_t cell) {
        const std::size_t i = cell / series.size();
        const std::size_t j = cell % series.size();
        channel::Environment env = cfg.env;
        Watts own = cfg.own_power;
        if (!cfg.series.variable.empty()) set_parameter(env, own, cfg.series.variable, series[j]);
        set_parameter(env, own, cfg.sweep.variable, points[i]);
        env.validate();
        std::vector<double>& row = t.rows[i];
        row[0] = points[i];
        std::size_t col = 1 + j * width;
        for (const auto& m : cfg.methods) {
            const std::uint64_t seed = cell_seed(cfg.seed, cell);
            try {
                switch (cfg.id) {
                    case ExperimentId::fig6:
                        row[col++] = outage_cell(cfg, env, own, m, seed);
                        break;
                    case ExperimentId::fig8:
                    case ExperimentId::fig9:
                        row[col++] = perf::bep(env, own, modulation, eval_method(m, cfg.mc_samples, seed));
                        break;
                    default: {
                        const EvalMethod em = eval_method(m, cfg.mc_samples, seed);
                        row[col++] = perf::achievable_rate(env, own, DuplexMode::full, em);
                        row[col++] = perf::achievable_rate(env, own, DuplexMode::half, em);
                    }
                }
            } catch (const AccuracyError& e) {
                throw AccuracyError(std::string(e.what()) + " (" + m + " at " + cfg.sweep.variable + " = " +
                                        format_number(points[i]) + ")",
                                    e.estimate(), e.achieved_rel_error());
            }
        }
    });
    return t;
}

std::shared_ptr<const contract::QoSTable> qos_table(const channel::Environment& env) {
    return std::make_shared<const contract::QoSTable>(env, contract::default_qos_config(env));
}

ResultTable run_contract_train(const ExperimentConfig& cfg) {
    const auto table = qos_table(cfg.env);
    const auto start = std::chrono::steady_clock::now();
    const diffusion::TrainResult result = diffusion::train(diffusion::EnvSource({table}), cfg.training);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const diffusion::Trainer& trainer = *result.trainer;
    diffusion::save_checkpoint(cfg.checkpoint, {cfg.training, trainer.schedule(), trainer.policy});

    ResultTable t;
    t.headers = {"episode", "reward", "reward_mean_100"};
    double window = 0.0;
    const auto& r = result.episode_reward;
    for (std::size_t k = 0; k < r.size(); ++k) {
        window += r[k];
        if (k >= 100) window -= r[k - 100];
        t.rows.push_back({static_cast<double>(k + 1), r[k], window / static_cast<double>(std::min<std::size_t>(k + 1, 100))});
    }
    const auto oracle = contract::oracle_optimal_contract(*table, contract::default_grid(cfg.env));
    const auto inferred =
        diffusion::infer(trainer.policy, trainer.schedule(), *table, cfg.training.encoding, cfg.evaluation.seeds.front());
    t.set_meta("train_seconds", format_number(seconds));
    t.set_meta("checkpoint", cfg.checkpoint);
    t.set_meta("inferred_c_q", format_number(inferred.contract.c_q));
    t.set_meta("inferred_c_f", format_number(inferred.contract.c_f));
    t.set_meta("inferred_u_sir", format_number(inferred.solution.u_sir));
    t.set_meta("oracle_u_sir", format_number(oracle.feasible ? oracle.best.u_sir : 0.0));
    return t;
}

ResultTable run_contract_eval(const ExperimentConfig& cfg) {
    const diffusion::Checkpoint cp = diffusion::load_checkpoint(cfg.checkpoint);
    const auto table = qos_table(cfg.env);
    const auto oracle = contract::oracle_optimal_contract(*table, contract::default_grid(cfg.env));
    const double baseline = contract::random_contract_baseline(*table, contract::default_box(cfg.env),
                                                               cfg.evaluation.baseline_samples, cfg.seed);
    const double mean = diffusion::mean_policy_reward(cp.policy, cp.schedule, *table, cp.config.encoding,
                                                      cfg.evaluation.policy_samples, cfg.seed);
    ResultTable t;
    t.headers = {"seed", "c_q", "c_f", "sip_power_dbw", "u_sip", "u_sir", "ir_satisfied", "fraction_of_oracle"};
    for (std::uint64_t s : cfg.evaluation.seeds) {
        const auto inf = diffusion::infer(cp.policy, cp.schedule, *table, cp.config.encoding, s);
        const auto& sol = inf.solution;
        t.rows.push_back({static_cast<double>(s), inf.contract.c_q, inf.contract.c_f, watts_to_dbw(sol.best_power),
                          sol.u_sip, sol.u_sir, sol.ir_satisfied ? 1.0 : 0.0,
                          oracle.feasible ? sol.u_sir / oracle.best.u_sir : 0.0});
    }
    t.set_meta("checkpoint", cfg.checkpoint);
    t.set_meta("oracle_feasible", oracle.feasible ? "true" : "false");
    if (oracle.feasible) {
        t.set_meta("oracle_c_q", format_number(oracle.best.contract.c_q));
        t.set_meta("oracle_c_f", format_number(oracle.best.contract.c_f));
        t.set_meta("oracle_u_sir", format_number(oracle.best.u_sir));
    }
    t.set_meta("random_baseline_u_sir", format_number(baseline));
    t.set_meta("policy_mean_u_sir", format_number(mean));
    return t;
}

ResultTable run_verify(const ExperimentConfig& cfg) {
    VerifyOptions opt;
    opt.battery = cfg.battery;
    opt.seed = cfg.seed;
    const VerifyReport report = verify(opt);
    ResultTable t;
    t.headers = {"check", "statistic", "tolerance", "passed", "seconds"};
    for (std::size_t k = 0; k < report.checks.size(); ++k) {
        const auto& c = report.checks[k];
        t.rows.push_back({static_cast<double>(k), c.statistic, c.tolerance, c.passed ? 1.0 : 0.0, c.seconds});
        t.set_meta("check_" + std::to_string(k), c.name);
    }
    t.set_meta("all_passed", report.passed() ? "true" : "false");
    return t;
}

}  // namespace

std::string column_name(const std::string& method, const Series& series, double value) {
    if (series.variable.empty()) return method;
    return method + "@" + series.variable + "=" + format_number(value);
}

ResultTable run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    ResultTable body;
    switch (cfg.id) {
        case ExperimentId::contract_train:
            body = run_contract_train(cfg);
            break;
        case ExperimentId::contract_eval:
            body = run_contract_eval(cfg);
            break;
        case ExperimentId::verify:
            body = run_verify(cfg);
            break;
        default:
            body = run_sweep(cfg);
    }
    ResultTable t;
    t.headers = std::move(body.headers);
    t.rows = std::move(body.rows);
    t.set_meta("tool", "duplex");
    t.set_meta("version", kToolVersion);
    t.set_meta("experiment", to_string(cfg.id));
    t.set_meta("config_hash", hex64(fnv1a(cfg.canonical)));
    t.set_meta("seed", std::to_string(cfg.seed));
    t.set_meta("config", cfg.canonical);
    for (const auto& [k, v] : body.metadata) t.set_meta(k, v);
    t.set_meta("wall_time_s",
               format_number(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()));
    t.validate();
    return t;
}

void write_result(const ExperimentConfig& cfg, const ResultTable& table) {
    if (cfg.output.empty()) throw ConfigError("no output path configured");
    std::ofstream out(cfg.output);
    if (!out) throw ConfigError("cannot write " + cfg.output);
    write_csv(out, table);
    if (!out) throw ConfigError("write failed for " + cfg.output);
}

}  // namespace duplex::cli
