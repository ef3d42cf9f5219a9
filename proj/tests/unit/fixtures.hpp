#pragma once

#include "duplex/channel/model.hpp"

namespace fixtures {

using duplex::Watts;
using duplex::channel::Environment;
using duplex::channel::FadingParams;

inline Environment base(double alpha, double mu) {
    Environment e;
    e.fading = FadingParams(alpha, mu, 8.0);
    e.path_loss_exponent = 2.0;
    e.interferer_power = duplex::dbw_to_watts(1.0);
    e.interference_scale = 0.2;
    e.si_cancellation = 0.2;
    e.interferer_count = 2;
    e.bandwidth_hz = 10e6;
    return e;
}

// Outage figure: α = μ = 2, σ² = 0.1, own power 0 dBW.
inline Environment outage_env(double distance, double peer_dbw) {
    Environment e = base(2.0, 2.0);
    e.distance_m = distance;
    e.noise_variance = 0.1;
    e.si_variance = 0.1;
    e.peer_power = duplex::dbw_to_watts(peer_dbw);
    return e;
}

inline Environment interference_limited(Environment e) {
    e.si_cancellation = 0.0;
    e.noise_variance = 1e-9;
    return e;
}

// BEP versus transmit power: D = 5 m, α = 4, μ = 5, σ² = 0.1, own 20 dBW.
inline Environment bep_env(double peer_dbw) {
    Environment e = base(4.0, 5.0);
    e.distance_m = 5.0;
    e.noise_variance = 0.1;
    e.si_variance = 0.1;
    e.peer_power = duplex::dbw_to_watts(peer_dbw);
    return e;
}

// BEP versus own power: D = 10 m, α = 4, peer 20 dBW.
inline Environment own_power_env(double mu) {
    Environment e = base(4.0, mu);
    e.distance_m = 10.0;
    e.noise_variance = 0.1;
    e.si_variance = 0.1;
    e.peer_power = duplex::dbw_to_watts(20.0);
    return e;
}

// Rate versus transmit power: α = 4, μ = 5, σ² = 0.8, own 10 dBW.
inline Environment rate_env(double distance, double peer_dbw) {
    Environment e = base(4.0, 5.0);
    e.distance_m = distance;
    e.noise_variance = 0.8;
    e.si_variance = 0.8;
    e.peer_power = duplex::dbw_to_watts(peer_dbw);
    return e;
}

// Contract environment.
inline Environment market_env() {
    Environment e;
    e.qos_value = 1000.0;
    e.power_cost = 0.03;
    e.distance_m = 6.0;
    e.path_loss_exponent = 12.9;
    e.fading = FadingParams(4.0, 4.0, 8.0);
    e.noise_variance = 0.2;
    e.si_variance = 0.2;
    e.si_cancellation = 0.2;
    e.interferer_power = duplex::dbw_to_watts(3.0);
    e.interference_scale = 0.3;
    e.interferer_count = 3;
    e.peer_power = duplex::dbw_to_watts(10.0);
    e.bandwidth_hz = 10e6;
    return e;
}

}  // namespace fixtures
