#include "duplex/contract/contract.hpp"

#include <algorithm>
#include <cmath>

#include "duplex/channel/random.hpp"
#include "duplex/error.hpp"
#include "duplex/parallel.hpp"

namespace duplex::contract {

bool ContractBox::contains(const Contract& c) const {
    return c.c_q >= c_q.lo && c.c_q <= c_q.hi && c.c_f >= c_f.lo && c.c_f <= c_f.hi;
}

void ContractBox::validate() const {
    if (!(c_q.lo >= 0.0 && c_q.lo <= c_q.hi) || !(c_f.lo >= 0.0 && c_f.lo <= c_f.hi))
        throw ConfigError("contract box: need 0 <= lo <= hi on both axes");
}

ContractBox default_box(const Environment& env) { return {{0.0, env.qos_value}, {0.0, env.qos_value}}; }

void QoSConfig::validate() const {
    if (!(rate_bounds.lo < rate_bounds.hi) || !(fidelity_bounds.lo < fidelity_bounds.hi))
        throw ConfigError("QoS: normalization bounds need t_min < t_max");
    if (power_grid.empty()) throw ConfigError("QoS: empty power grid");
    for (std::size_t i = 0; i < power_grid.size(); ++i) {
        if (!(power_grid[i].value > 0.0)) throw ConfigError("QoS: grid powers must be positive");
        if (i > 0 && !(power_grid[i].value > power_grid[i - 1].value))
            throw ConfigError("QoS: power grid must be strictly ascending");
    }
    if (!(algorithm_factor > 0.0)) throw ConfigError("QoS: algorithm factor must be positive");
    channel::modulation(modulation);
}

std::vector<Watts> power_grid(std::size_t points, double lo_dbw, double hi_dbw) {
    if (points == 0 || (points > 1 && !(lo_dbw < hi_dbw))) throw ConfigError("power grid: bad range");
    std::vector<Watts> grid(points);
    for (std::size_t i = 0; i < points; ++i) {
        const double t = points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(points - 1);
        grid[i] = dbw_to_watts(lo_dbw + t * (hi_dbw - lo_dbw));
    }
    return grid;
}

LinkQuality link_quality(const Environment& env, Watts sip_power, const QoSConfig& cfg) {
    Environment e = env;
    e.peer_power = sip_power;
    const Watts own = env.peer_power;
    return {perf::achievable_rate(e, own, perf::DuplexMode::full, cfg.method),
            perf::bep(e, own, channel::modulation(cfg.modulation), cfg.method)};
}

QoSConfig default_qos_config(const Environment& env, std::vector<Watts> grid) {
    QoSConfig cfg;
    cfg.power_grid = std::move(grid);
    if (cfg.power_grid.empty()) throw ConfigError("QoS: empty power grid");
    const LinkQuality lo = link_quality(env, cfg.power_grid.front(), cfg);
    const LinkQuality hi = link_quality(env, cfg.power_grid.back(), cfg);
    cfg.rate_bounds = {lo.rate, hi.rate};
    cfg.fidelity_bounds = {1.0 - lo.bep, 1.0 - hi.bep};
    cfg.validate();
    return cfg;
}

double normalize(double t, Bounds b) {
    if (!(b.lo < b.hi)) throw ConfigError("normalize: need t_min < t_max");
    return std::clamp((t - b.lo) / (b.hi - b.lo), 0.0, 1.0);
}

double qos_from_quality(const LinkQuality& q, const QoSConfig& cfg) {
    return cfg.algorithm_factor * normalize(q.rate, cfg.rate_bounds) * normalize(1.0 - q.bep, cfg.fidelity_bounds);
}

double qos(const Environment& env, Watts sip_power, const QoSConfig& cfg) {
    return qos_from_quality(link_quality(env, sip_power, cfg), cfg);
}

QoSTable::QoSTable(const Environment& env, QoSConfig cfg) : env_(env), cfg_(std::move(cfg)) {
    env_.validate();
    cfg_.validate();
    quality_.resize(cfg_.power_grid.size());
    parallel_for(quality_.size(), [&](std::size_t i) { quality_[i] = link_quality(env_, cfg_.power_grid[i], cfg_); });
    qos_.resize(quality_.size());
    for (std::size_t i = 0; i < qos_.size(); ++i) qos_[i] = qos_from_quality(quality_[i], cfg_);
}

Utilities utilities(const Contract& c, const Environment& env, Watts sip_power, double q) {
    return {c.c_q * q - env.power_cost * sip_power.value + c.c_f, (env.qos_value - c.c_q) * q - c.c_f};
}

Utilities utilities(const Contract& c, const Environment& env, Watts sip_power, const QoSConfig& cfg) {
    return utilities(c, env, sip_power, qos(env, sip_power, cfg));
}

BestResponse best_response_power(const Contract& c, const QoSTable& table) {
    BestResponse best;
    for (std::size_t i = 0; i < table.size(); ++i) {
        const double u = utilities(c, table.environment(), table.power(i), table.qos(i)).sip;
        if (i == 0 || u > best.u_sip) best = {i, table.power(i), u};
    }
    return best;
}

BestResponse best_response_power(const Contract& c, const Environment& env, const QoSConfig& cfg) {
    return best_response_power(c, QoSTable(env, cfg));
}

double infeasibility_penalty(const Contract& c) { return -c.c_f - 1.0; }

ContractSolution evaluate_contract(const Contract& c, const QoSTable& table) {
    const BestResponse br = best_response_power(c, table);
    const double q = table.qos(br.index);
    const Utilities u = utilities(c, table.environment(), br.power, q);
    ContractSolution s;
    s.contract = c;
    s.best_power = br.power;
    s.qos = q;
    s.u_sip = u.sip;
    s.ir_satisfied = u.sip >= table.config().u_th_sip;
    s.u_sir = s.ir_satisfied ? u.sir : infeasibility_penalty(c);
    return s;
}

ContractSolution evaluate_contract(const Contract& c, const Environment& env, const QoSConfig& cfg) {
    return evaluate_contract(c, QoSTable(env, cfg));
}

GridSpec default_grid(const Environment& env) { return {default_box(env)}; }

namespace {

double grid_point(Bounds b, std::size_t i, std::size_t n) {
    if (n == 1) return b.lo;
    return b.lo + (b.hi - b.lo) * static_cast<double>(i) / static_cast<double>(n - 1);
}

}  // namespace

OracleResult oracle_optimal_contract(const QoSTable& table, const GridSpec& grid) {
    grid.box.validate();
    if (grid.c_q_points == 0 || grid.c_f_points == 0) throw ConfigError("oracle grid: need at least one point per axis");
    OracleResult r;
    // Row-major in (c_q, c_f) with a strict comparison keeps the
    // lexicographically smallest maximizer.
    for (std::size_t i = 0; i < grid.c_q_points; ++i) {
        for (std::size_t j = 0; j < grid.c_f_points; ++j) {
            const Contract c{grid_point(grid.box.c_q, i, grid.c_q_points), grid_point(grid.box.c_f, j, grid.c_f_points)};
            const ContractSolution s = evaluate_contract(c, table);
            ++r.evaluated;
            if (!s.ir_satisfied) continue;
            if (!r.feasible || s.u_sir > r.best.u_sir) {
                r.feasible = true;
                r.best = s;
            }
        }
    }
    return r;
}

double random_contract_baseline(const QoSTable& table, const ContractBox& box, std::size_t samples,
                                std::uint64_t seed) {
    box.validate();
    if (samples == 0) throw ConfigError("random baseline: need at least one sample");
    channel::RandomStream rng(seed);
    double sum = 0.0;
    for (std::size_t k = 0; k < samples; ++k) {
        const Contract c{box.c_q.lo + (box.c_q.hi - box.c_q.lo) * rng.uniform(),
                         box.c_f.lo + (box.c_f.hi - box.c_f.lo) * rng.uniform()};
        sum += evaluate_contract(c, table).u_sir;
    }
    return sum / static_cast<double>(samples);
}

}  // namespace duplex::contract
