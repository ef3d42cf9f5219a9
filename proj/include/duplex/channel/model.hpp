#pragma once

#include <string>
#include <vector>

#include "duplex/channel/units.hpp"

namespace duplex::channel {

// Squared α-μ envelope Y = β·Z^{2/α} with Z ~ Gamma(μ, 1), so that
// E[Y] = mean_power when β = mean_power·Γ(μ)/Γ(μ + 2/α).
class FadingParams {
public:
    FadingParams() : FadingParams(2.0, 1.0, 1.0) {}
    FadingParams(double alpha, double mu, double mean_power = 1.0);

    double alpha() const { return alpha_; }
    double mu() const { return mu_; }
    double mean_power() const { return mean_power_; }
    double scale() const { return scale_; }

    double cdf(double y) const;
    double pdf(double y) const;

private:
    double alpha_;
    double mu_;
    double mean_power_;
    double scale_;
};

// Link and market parameters of one receiver.  Powers in watts.
struct Environment {
    double qos_value = 1000.0;          // SIR's utility gain per unit QoS
    double power_cost = 0.03;           // SIP's cost per watt
    double distance_m = 5.0;
    double path_loss_exponent = 2.0;
    FadingParams fading;
    double noise_variance = 0.1;
    double si_variance = 0.1;           // self-interference variance per unit own power
    double si_cancellation = 0.2;       // residual fraction after cancellation, in [0, 1]
    Watts interferer_power{1.0};
    double interference_scale = 0.2;    // mean power of one interfering path
    int interferer_count = 2;
    Watts peer_power{1.0};              // transmitter power
    double bandwidth_hz = 10e6;

    // Throws ConfigError on any violated invariant.
    void validate() const;
};

struct ModulationScheme {
    std::string name;
    double tau1 = 1.0;
    double tau2 = 0.5;

    // Throws ConfigError unless both parameters are positive.
    void validate() const;
};

// BPSK, coherent BFSK, non-coherent BFSK, DPSK.
const std::vector<ModulationScheme>& modulation_table();
// Case-insensitive lookup in modulation_table(); throws ConfigError.
const ModulationScheme& modulation(const std::string& name);

// Scales of the SINR γ = a·Z^{2/α} / (φ + b·G), Z ~ Gamma(μ,1), G ~ Gamma(N,1).
struct LinkScales {
    double signal = 0.0;        // a = P_j D^{-β_k} β
    double interference = 0.0;  // b = η P_I
    double floor = 0.0;         // φ = υ P_own σ_S² + σ_N²
};

LinkScales link_scales(const Environment& env, Watts own_power);

struct ChannelSample {
    double h2 = 0.0;   // squared fading gain
    double u = 0.0;    // aggregate interference gain
    double phi = 0.0;  // noise plus residual self-interference power
};

double noise_floor(const Environment& env, Watts own_power);

// SINR of one channel draw.  With interference_limited the noise floor is
// dropped, leaving signal over interference.
double sinr(const Environment& env, Watts own_power, const ChannelSample& sample, bool interference_limited = false);

}  // namespace duplex::channel
