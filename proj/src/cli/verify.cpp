#include "duplex/cli/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "json.hpp"

#include "duplex/channel/sampling.hpp"
#include "duplex/cli/table.hpp"
#include "duplex/contract/contract.hpp"
#include "duplex/diffusion/network.hpp"
#include "duplex/diffusion/policy.hpp"
#include "duplex/error.hpp"
#include "duplex/perf/kernels.hpp"
#include "duplex/perf/metrics.hpp"
#include "duplex/special/gamma.hpp"

namespace duplex::cli {

namespace {

using channel::Environment;
using perf::SinrModel;

struct Measured {
    double statistic;
    std::string detail;
};

struct CheckSpec {
    const char* name;
    double tolerance;
    bool full_only;
    std::function<Measured(std::uint64_t seed, bool full)> run;
};

std::string describe(const SinrModel& m) {
    return "a=" + format_number(m.a) + " b=" + format_number(m.b) + " phi=" + format_number(m.phi) +
           " alpha=" + format_number(m.alpha) + " mu=" + format_number(m.mu) + " N=" + format_number(m.n);
}

double rel(double x, double ref) { return std::abs(x - ref) / std::max(std::abs(ref), 1e-300); }

Environment outage_env() {
    Environment e;
    e.fading = channel::FadingParams(2.0, 2.0, 8.0);
    e.distance_m = 5.0;
    e.path_loss_exponent = 2.0;
    e.noise_variance = 0.1;
    e.si_variance = 0.1;
    e.si_cancellation = 0.2;
    e.interferer_power = dbw_to_watts(1.0);
    e.interference_scale = 0.2;
    e.interferer_count = 2;
    e.peer_power = dbw_to_watts(10.0);
    return e;
}

const Watts kOwn = dbw_to_watts(0.0);
constexpr double kBodyFloor = 1e-6;

bool in_body(const SinrModel& m, double x) {
    const double c = perf::reference::cdf(m, x);
    return c >= kBodyFloor && 1.0 - c >= kBodyFloor;
}

template <class F>
double log_integral(F&& pdf, double lo, double hi) {
    boost::math::quadrature::tanh_sinh<double> q;
    return q.integrate([&](double u) { return pdf(std::exp(u)) * std::exp(u); }, std::log(lo), std::log(hi), 1e-7);
}

Environment random_env(channel::RandomStream& pick) {
    Environment e;
    e.fading = channel::FadingParams(1.0 + 3.0 * pick.uniform(), 1.0 + 4.0 * pick.uniform(), 8.0);
    e.interferer_count = 1 + static_cast<int>(pick.below(3));
    e.distance_m = 2.0 + 8.0 * pick.uniform();
    e.noise_variance = 0.05 + pick.uniform();
    e.si_variance = 0.05 + pick.uniform();
    e.peer_power = dbw_to_watts(30.0 * pick.uniform());
    e.interferer_power = dbw_to_watts(1.0);
    return e;
}

Measured gamma_identities(std::uint64_t, bool) {
    namespace sf = special;
    double worst = 0.0;
    for (double a : {0.3, 0.5, 1.0, 2.5, 7.0, 20.0}) {
        worst = std::max(worst, std::abs(sf::log_gamma(a + 1.0) - sf::log_gamma(a) - std::log(a)) /
                                    std::max(1.0, std::abs(sf::log_gamma(a + 1.0))));
        for (double x : {0.1, 1.0, 5.0, 30.0}) {
            worst = std::max(worst, std::abs(sf::gamma_p(a, x) + sf::gamma_q(a, x) - 1.0));
            const double lower = sf::incomplete_gamma(a, x, sf::IncompleteKind::lower);
            const double next = sf::incomplete_gamma(a + 1.0, x, sf::IncompleteKind::lower);
            worst = std::max(worst, rel(next, a * lower - std::pow(x, a) * std::exp(-x)));
        }
    }
    for (double x : {0.1, 0.25, 0.4, 0.7, 0.9}) {
        const double lhs = sf::log_gamma(x) + sf::log_gamma(1.0 - x);
        worst = std::max(worst, std::abs(lhs - std::log(std::numbers::pi / std::sin(std::numbers::pi * x))));
    }
    return {worst, "recurrence, reflection, P + Q = 1, lower incomplete recurrence"};
}

Measured density_normalization(std::uint64_t, bool) {
    const auto m = perf::make_model(outage_env(), kOwn);
    const double tails = perf::closed::cdf(m, 1e-4) + perf::closed::ccdf(m, 1e3);
    const double full = log_integral([&](double x) { return perf::closed::pdf(m, x); }, 1e-4, 1e3) + tails;
    const double il = log_integral([&](double x) { return perf::limited::pdf(m, x); }, 1e-4, 1e3) + tails;
    return {std::max(std::abs(full - 1.0), std::abs(il - 1.0)), "integral of both density forms over the SINR axis"};
}

Measured pdf_cdf_consistency(std::uint64_t, bool) {
    const auto m = perf::make_model(outage_env(), kOwn);
    double lo = 1e-4;
    double integral = perf::closed::cdf(m, lo);
    double worst = 0.0;
    for (double x : {0.05, 0.2, 1.0, 4.0, 20.0, 100.0}) {
        integral += log_integral([&](double t) { return perf::closed::pdf(m, t); }, lo, x);
        worst = std::max(worst, std::abs(integral - perf::closed::cdf(m, x)));
        lo = x;
    }
    return {worst, "CDF against the running density integral"};
}

Measured oracle_equivalence(std::uint64_t seed, bool full) {
    channel::RandomStream pick(seed, 11);
    double worst = 0.0;
    const int draws = full ? 100 : 20;
    for (int i = 0; i < draws; ++i) {
        SinrModel m;
        m.alpha = 1.0 + 4.0 * pick.uniform();
        m.mu = 0.5 + 4.5 * pick.uniform();
        m.n = 1.0 + static_cast<double>(pick.below(4));
        m.a = std::pow(10.0, -1.0 + 2.0 * pick.uniform());
        m.b = std::pow(10.0, -1.5 + 1.5 * pick.uniform());
        m.phi = std::pow(10.0, -1.5 + 1.5 * pick.uniform());
        SinrModel il = m;
        il.phi = 0.0;
        // Body of the distribution only: with less than 1e-6 mass on either
        // side the full form is allowed to decline with AccuracyError.
        for (double x : {0.05, 0.4, 1.5, 7.0}) {
            try {
                if (in_body(m, x))
                    worst = std::max(worst, rel(perf::closed::pdf(m, x), perf::reference::pdf(m, x)));
                if (in_body(il, x))
                    worst = std::max(worst, rel(perf::limited::pdf(m, x), perf::reference::pdf(il, x)));
            } catch (const Error& e) {
                throw NumericalError(std::string(e.what()) + " at x = " + format_number(x) + " for " + describe(m));
            }
        }
    }
    return {worst, std::to_string(draws) +
                       " random models, both densities against their pre-transform integrals where CDF and CCDF >= 1e-6"};
}

Measured rate_bep_quadrature(std::uint64_t seed, bool full) {
    channel::RandomStream pick(seed, 12);
    const auto& bpsk = channel::modulation("BPSK");
    double worst = 0.0;
    const int draws = full ? 20 : 5;
    for (int i = 0; i < draws; ++i) {
        const Environment e = random_env(pick);
        const Watts own = dbw_to_watts(20.0 * pick.uniform());
        worst = std::max(worst, rel(perf::achievable_rate(e, own, perf::DuplexMode::full),
                                    perf::achievable_rate(e, own, perf::DuplexMode::full, perf::EvalMethod::quadrature())));
        // The closed-form BEP is 1/2 - H, accurate in absolute terms; below
        // 1e-6 the error is scaled by 1e-6 instead of the value.
        const double ref = perf::bep(e, own, bpsk, perf::EvalMethod::quadrature());
        worst = std::max(worst, std::abs(perf::bep(e, own, bpsk) - ref) / std::max(ref, kBodyFloor));
    }
    return {worst, std::to_string(draws) + " random environments, closed form against quadrature (BEP floor 1e-6)"};
}

Measured monte_carlo_agreement(std::uint64_t seed, bool full) {
    const Environment e = outage_env();
    const auto m = perf::make_model(e, kOwn);
    std::vector<double> grid;
    for (int i = 0; i < 50; ++i) grid.push_back(std::pow(10.0, -2.0 + 4.0 * i / 49.0));
    channel::MonteCarloSpec spec;
    spec.samples = 1000000;
    spec.seed = seed;
    const auto emp = channel::sinr_empirical_cdf(e, kOwn, spec, grid);
    double sup = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) sup = std::max(sup, std::abs(perf::closed::cdf(m, grid[i]) - emp[i]));
    return {sup, "sup-norm of closed-form CDF minus the 10^6-sample empirical CDF"};
}

Measured degenerate_oracle(std::uint64_t, bool) {
    SinrModel m;
    m.a = 3.0;
    m.b = 0.7;
    m.phi = 0.0;
    m.alpha = 2.0;
    m.mu = 1.0;
    m.n = 3.0;
    double worst = 0.0;
    for (double x : {0.01, 0.1, 0.5, 2.0, 10.0, 40.0}) {
        const double elementary = 1.0 - std::pow(1.0 + x * m.b / m.a, -m.n);
        worst = std::max(worst, rel(perf::limited::cdf(m, x), elementary));
        worst = std::max(worst, rel(perf::limited::cdf(m, x), perf::reference::cdf(m, x)));
    }
    return {worst, "alpha = 2, mu = 1: H-function CDF against 1 - (1 + xb/a)^-N and quadrature"};
}

const contract::QoSTable& small_market_table() {
    static const contract::QoSTable table = [] {
        Environment e;
        e.qos_value = 1000.0;
        e.power_cost = 0.03;
        e.distance_m = 6.0;
        e.path_loss_exponent = 12.9;
        e.fading = channel::FadingParams(4.0, 4.0, 8.0);
        e.noise_variance = 0.2;
        e.si_variance = 0.2;
        e.si_cancellation = 0.2;
        e.interferer_power = dbw_to_watts(3.0);
        e.interference_scale = 0.3;
        e.interferer_count = 3;
        e.peer_power = dbw_to_watts(10.0);
        return contract::QoSTable(e, contract::default_qos_config(e, contract::power_grid(8)));
    }();
    return table;
}

Measured budget_identity(std::uint64_t seed, bool) {
    const auto& table = small_market_table();
    const Environment& env = table.environment();
    channel::RandomStream pick(seed, 13);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const contract::Contract c{env.qos_value * pick.uniform(), env.qos_value * pick.uniform()};
        const std::size_t i = pick.below(table.size());
        const auto u = contract::utilities(c, env, table.power(i), table.qos(i));
        const double total = env.qos_value * table.qos(i) - env.power_cost * table.power(i).value;
        worst = std::max(worst, std::abs(u.sip + u.sir - total) / env.qos_value);
    }
    return {worst, "u_sip + u_sir = c_s Q - c_p P on 1000 random (contract, power) pairs, scaled by c_s"};
}

Measured fee_shift(std::uint64_t seed, bool) {
    const auto& table = small_market_table();
    const Environment& env = table.environment();
    channel::RandomStream pick(seed, 14);
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
        const contract::Contract c{env.qos_value * pick.uniform(), 100.0 * pick.uniform()};
        const double delta = 50.0 * pick.uniform();
        const std::size_t i = pick.below(table.size());
        const auto a = contract::utilities(c, env, table.power(i), table.qos(i));
        const auto b = contract::utilities({c.c_q, c.c_f + delta}, env, table.power(i), table.qos(i));
        worst = std::max({worst, std::abs(b.sip - a.sip - delta) / env.qos_value,
                          std::abs(a.sir - b.sir - delta) / env.qos_value});
        if (contract::best_response_power(c, table).index != contract::best_response_power({c.c_q, c.c_f + delta}, table).index)
            worst = std::max(worst, 1.0);
    }
    return {worst, "raising c_f by d moves u_sip by +d and u_sir by -d; best response unchanged"};
}

Measured oracle_dominance(std::uint64_t seed, bool) {
    const auto& table = small_market_table();
    contract::GridSpec grid = contract::default_grid(table.environment());
    grid.c_q_points = 64;
    grid.c_f_points = 64;
    const auto oracle = contract::oracle_optimal_contract(table, grid);
    if (!oracle.feasible) return {1.0, "oracle found no feasible contract"};
    channel::RandomStream pick(seed, 15);
    double worst = -1e300;
    const double dq = (grid.box.c_q.hi - grid.box.c_q.lo) / static_cast<double>(grid.c_q_points - 1);
    const double df = (grid.box.c_f.hi - grid.box.c_f.lo) / static_cast<double>(grid.c_f_points - 1);
    for (int k = 0; k < 2000; ++k) {
        const contract::Contract c{grid.box.c_q.lo + dq * static_cast<double>(pick.below(grid.c_q_points)),
                                   grid.box.c_f.lo + df * static_cast<double>(pick.below(grid.c_f_points))};
        worst = std::max(worst, contract::evaluate_contract(c, table).u_sir - oracle.best.u_sir);
    }
    return {std::max(worst, 0.0), "largest excess of a random grid contract over the oracle"};
}

Measured gradient_check(std::uint64_t seed, bool) {
    using diffusion::Matrix;
    using diffusion::Vector;
    channel::RandomStream rng(seed, 16);
    auto random_matrix = [&](Eigen::Index r, Eigen::Index c) {
        Matrix m(r, c);
        for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = rng.normal();
        return m;
    };
    auto mismatch = [&](Vector& params, const Vector& analytic, const std::function<double()>& loss) {
        double worst = 0.0;
        for (int p = 0; p < 100; ++p) {
            const auto k = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(params.size())));
            const double saved = params[k];
            params[k] = saved + 1e-5;
            const double up = loss();
            params[k] = saved - 1e-5;
            const double down = loss();
            params[k] = saved;
            const double numeric = (up - down) / 2e-5;
            worst = std::max(worst, std::abs(analytic[k] - numeric) / std::max(1e-3, std::abs(numeric)));
        }
        return worst;
    };

    // Critic regression loss.
    diffusion::DenseNet critic = diffusion::make_critic_net(16);
    critic.initialize(rng);
    const Matrix x = random_matrix(diffusion::critic_input_size(), 8);
    const Vector y = random_matrix(8, 1).col(0);
    auto critic_loss = [&] { return (critic.forward(x).row(0).transpose() - y).squaredNorm() / 8.0; };
    diffusion::DenseNet::Tape tape;
    const Vector q = critic.forward(x, &tape).row(0).transpose();
    Vector grad = Vector::Zero(static_cast<Eigen::Index>(critic.parameter_count()));
    critic.backward(tape, (2.0 / 8.0 * (q - y)).transpose(), grad);
    double worst = mismatch(critic.parameters(), grad, critic_loss);

    // Policy loss through the denoising chain.
    const diffusion::DiffusionSchedule s = diffusion::DiffusionSchedule::linear(5);
    diffusion::DenseNet policy = diffusion::make_policy_net(8);
    policy.initialize(rng);
    const Matrix env = random_matrix(diffusion::kEnvComponents, 4).cwiseMax(-1.0).cwiseMin(1.0);
    const auto noise = diffusion::chain_noise(s, 4, rng);
    const Matrix u = random_matrix(diffusion::kActionDim, 4);
    auto policy_loss = [&] { return (diffusion::denoise_batch(policy, s, env, noise).array() * u.array()).sum(); };
    diffusion::ChainTape chain;
    diffusion::denoise_batch(policy, s, env, noise, &chain);
    const Vector pgrad = diffusion::backprop_chain(policy, s, chain, u, false);
    worst = std::max(worst, mismatch(policy.parameters(), pgrad, policy_loss));
    return {worst, "critic regression and denoising-chain gradients against central differences"};
}

Measured soft_update_check(std::uint64_t seed, bool) {
    channel::RandomStream rng(seed, 17);
    diffusion::DenseNet a = diffusion::make_critic_net(16);
    diffusion::DenseNet b = diffusion::make_critic_net(16);
    a.initialize(rng);
    b.initialize(rng);
    const diffusion::Vector a0 = a.parameters();
    diffusion::soft_update(a, b, 0.3);
    double worst = (a.parameters() - (0.3 * b.parameters() + 0.7 * a0)).cwiseAbs().maxCoeff();
    diffusion::soft_update(a, b, 1.0);
    worst = std::max(worst, (a.parameters() - b.parameters()).cwiseAbs().maxCoeff());
    return {worst, "target update is the exact convex combination"};
}

Measured rate_monte_carlo(std::uint64_t seed, bool) {
    Environment e = outage_env();
    e.fading = channel::FadingParams(4.0, 5.0, 8.0);
    e.noise_variance = 0.8;
    e.si_variance = 0.8;
    const Watts own = dbw_to_watts(10.0);
    double worst = 0.0;
    for (double p : {0.0, 10.0, 20.0}) {
        e.peer_power = dbw_to_watts(p);
        for (auto mode : {perf::DuplexMode::full, perf::DuplexMode::half})
            worst = std::max(worst, rel(perf::achievable_rate(e, own, mode),
                                        perf::achievable_rate(e, own, mode, perf::EvalMethod::monte_carlo(1000000, seed))));
    }
    return {worst, "closed-form rate against 10^6-sample Monte Carlo, both duplex modes"};
}

Measured bep_monte_carlo(std::uint64_t seed, bool) {
    Environment e = outage_env();
    e.fading = channel::FadingParams(4.0, 5.0, 8.0);
    const Watts own = dbw_to_watts(20.0);
    const auto& bpsk = channel::modulation("BPSK");
    double worst = 0.0;
    for (double p : {0.0, 8.0, 16.0}) {
        e.peer_power = dbw_to_watts(p);
        worst = std::max(worst, rel(perf::bep(e, own, bpsk), perf::bep(e, own, bpsk, perf::EvalMethod::monte_carlo(1000000, seed))));
    }
    return {worst, "closed-form BPSK error probability against 10^6-sample Monte Carlo"};
}

const std::vector<CheckSpec>& all_checks() {
    static const std::vector<CheckSpec> checks = {
        {"gamma_identities", 1e-12, false, gamma_identities},
        {"density_normalization", 1e-3, false, density_normalization},
        {"pdf_cdf_consistency", 1e-4, false, pdf_cdf_consistency},
        {"oracle_equivalence", 1e-4, false, oracle_equivalence},
        {"rate_bep_quadrature", 1e-5, false, rate_bep_quadrature},
        {"monte_carlo_agreement", 5e-3, false, monte_carlo_agreement},
        {"degenerate_oracle", 1e-4, false, degenerate_oracle},
        {"budget_identity", 1e-12, false, budget_identity},
        {"fee_shift", 1e-12, false, fee_shift},
        {"oracle_dominance", 0.0, false, oracle_dominance},
        {"gradient_check", 1e-4, false, gradient_check},
        {"soft_update", 1e-12, false, soft_update_check},
        {"rate_monte_carlo", 0.02, true, rate_monte_carlo},
        {"bep_monte_carlo", 0.05, true, bep_monte_carlo},
    };
    return checks;
}

void check_battery(const std::string& battery) {
    if (battery != "default" && battery != "full") throw ConfigError("unknown battery '" + battery + "'");
}

}  // namespace

bool VerifyReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::vector<std::string> check_names(const std::string& battery) {
    check_battery(battery);
    std::vector<std::string> out;
    for (const auto& c : all_checks())
        if (!c.full_only || battery == "full") out.push_back(c.name);
    return out;
}

double default_tolerance(const std::string& check) {
    for (const auto& c : all_checks())
        if (check == c.name) return c.tolerance;
    throw ConfigError("unknown check '" + check + "'");
}

VerifyReport verify(const VerifyOptions& options) {
    check_battery(options.battery);
    const auto names = check_names(options.battery);
    for (const auto& [name, tol] : options.tolerances) {
        if (std::find(names.begin(), names.end(), name) == names.end())
            throw ConfigError("no check named '" + name + "' in the " + options.battery + " battery");
        if (!(tol >= 0.0)) throw ConfigError("tolerance for '" + name + "' must be non-negative");
    }
    for (const auto& name : options.checks)
        if (std::find(names.begin(), names.end(), name) == names.end())
            throw ConfigError("no check named '" + name + "' in the " + options.battery + " battery");
    auto selected = [&](const std::string& name) {
        return options.checks.empty() ||
               std::find(options.checks.begin(), options.checks.end(), name) != options.checks.end();
    };
    VerifyReport report;
    report.battery = options.battery;
    report.seed = options.seed;
    const bool full = options.battery == "full";
    const auto start = std::chrono::steady_clock::now();
    for (const auto& spec : all_checks()) {
        if ((spec.full_only && !full) || !selected(spec.name)) continue;
        CheckResult r;
        r.name = spec.name;
        const auto it = options.tolerances.find(spec.name);
        r.tolerance = it == options.tolerances.end() ? spec.tolerance : it->second;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const Measured m = spec.run(options.seed, full);
            r.statistic = m.statistic;
            r.detail = m.detail;
            r.passed = std::isfinite(m.statistic) && m.statistic <= r.tolerance;
        } catch (const std::exception& e) {
            r.statistic = std::numeric_limits<double>::infinity();
            r.detail = std::string("raised: ") + e.what();
            r.passed = false;
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        report.checks.push_back(std::move(r));
    }
    report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

std::string report_json(const VerifyReport& report) {
    nlohmann::json j;
    j["battery"] = report.battery;
    j["seed"] = report.seed;
    j["passed"] = report.passed();
    j["wall_time_s"] = report.wall_time_s;
    j["checks"] = nlohmann::json::array();
    for (const auto& c : report.checks) {
        nlohmann::json item = {{"name", c.name},       {"tolerance", c.tolerance}, {"passed", c.passed},
                               {"seconds", c.seconds}, {"detail", c.detail}};
        // JSON has no infinity; a raised check reports null.
        item["statistic"] = std::isfinite(c.statistic) ? nlohmann::json(c.statistic) : nlohmann::json(nullptr);
        j["checks"].push_back(item);
    }
    return j.dump(2);
}

}  // namespace duplex::cli
