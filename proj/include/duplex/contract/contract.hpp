#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "duplex/channel/model.hpp"
#include "duplex/perf/metrics.hpp"

namespace duplex::contract {

using channel::Environment;

// Offer from the SIR: c_q per unit of QoS plus a fixed payment c_f.
struct Contract {
    double c_q = 0.0;
    double c_f = 0.0;
};

struct Bounds {
    double lo = 0.0;
    double hi = 1.0;
};

// Box of admissible contracts.
struct ContractBox {
    Bounds c_q;
    Bounds c_f;

    bool contains(const Contract& c) const;
    // Throws ConfigError unless lo <= hi on both axes and lo >= 0.
    void validate() const;
};

// [0, c_s] on both axes.
ContractBox default_box(const Environment& env);

struct QoSConfig {
    double algorithm_factor = 1.0;
    Bounds rate_bounds;               // bit/s
    Bounds fidelity_bounds;           // 1 - BEP
    std::vector<Watts> power_grid;    // ascending SIP powers
    double u_th_sip = 0.0;
    std::string modulation = "BPSK";
    perf::EvalMethod method;

    void validate() const;
};

// `points` powers evenly spaced in dBW over [lo_dbw, hi_dbw].
std::vector<Watts> power_grid(std::size_t points = 64, double lo_dbw = 0.0, double hi_dbw = 30.0);

// Bounds set to the rate and fidelity reached at the grid end points, so
// each normalized factor spans [0, 1] over the grid.
QoSConfig default_qos_config(const Environment& env, std::vector<Watts> grid = power_grid());

// (t - lo)/(hi - lo) clamped to [0, 1]; throws ConfigError unless lo < hi.
double normalize(double t, Bounds b);

struct LinkQuality {
    double rate = 0.0;  // bit/s
    double bep = 0.0;
};

// The SIP transmits with sip_power; the SIR's own transmission
// (env.peer_power) leaks into its receiver as self-interference.
LinkQuality link_quality(const Environment& env, Watts sip_power, const QoSConfig& cfg);

double qos_from_quality(const LinkQuality& q, const QoSConfig& cfg);
double qos(const Environment& env, Watts sip_power, const QoSConfig& cfg);

// QoS over the power grid of one environment, computed once.
class QoSTable {
public:
    QoSTable(const Environment& env, QoSConfig cfg);

    const Environment& environment() const { return env_; }
    const QoSConfig& config() const { return cfg_; }
    std::size_t size() const { return qos_.size(); }
    Watts power(std::size_t i) const { return cfg_.power_grid[i]; }
    double qos(std::size_t i) const { return qos_[i]; }
    const LinkQuality& quality(std::size_t i) const { return quality_[i]; }

private:
    Environment env_;
    QoSConfig cfg_;
    std::vector<LinkQuality> quality_;
    std::vector<double> qos_;
};

struct Utilities {
    double sip = 0.0;
    double sir = 0.0;
};

// u_sip = c_q Q - c_p P + c_f,  u_sir = (c_s - c_q) Q - c_f.
Utilities utilities(const Contract& c, const Environment& env, Watts sip_power, double qos);
Utilities utilities(const Contract& c, const Environment& env, Watts sip_power, const QoSConfig& cfg);

struct BestResponse {
    std::size_t index = 0;
    Watts power;
    double u_sip = 0.0;
};

// Grid argmax of the SIP utility; ties go to the smaller power.
BestResponse best_response_power(const Contract& c, const QoSTable& table);
BestResponse best_response_power(const Contract& c, const Environment& env, const QoSConfig& cfg);

struct ContractSolution {
    Contract contract;
    Watts best_power;
    double qos = 0.0;
    double u_sip = 0.0;
    double u_sir = 0.0;  // the penalty when IR fails
    bool ir_satisfied = false;
};

// SIR reward for a contract the SIP rejects.
double infeasibility_penalty(const Contract& c);

ContractSolution evaluate_contract(const Contract& c, const QoSTable& table);
ContractSolution evaluate_contract(const Contract& c, const Environment& env, const QoSConfig& cfg);

struct GridSpec {
    ContractBox box;
    std::size_t c_q_points = 256;
    std::size_t c_f_points = 256;
};

GridSpec default_grid(const Environment& env);

struct OracleResult {
    bool feasible = false;
    ContractSolution best;
    std::size_t evaluated = 0;
};

// Exhaustive scan of the grid; the IR-feasible maximizer of u_sir, ties to
// the smaller (c_q, c_f) in lexicographic order.
OracleResult oracle_optimal_contract(const QoSTable& table, const GridSpec& grid);

// Mean u_sir of contracts drawn uniformly from the box.
double random_contract_baseline(const QoSTable& table, const ContractBox& box, std::size_t samples,
                                std::uint64_t seed);

}  // namespace duplex::contract
