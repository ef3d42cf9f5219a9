#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "duplex/channel/model.hpp"
#include "duplex/channel/random.hpp"

namespace duplex::channel {

// Y = β·Z^{2/α}, Z ~ Gamma(μ, 1).
double sample_fading_power(const FadingParams& params, RandomStream& rng);

// Aggregate interference gain, Gamma(shape N, scale η).
double sample_interference_aggregate(int count, double scale, RandomStream& rng);

ChannelSample sample_channel(const Environment& env, Watts own_power, RandomStream& rng);

struct MonteCarloSpec {
    std::size_t samples = 1000000;
    std::uint64_t seed = 0;
    std::size_t streams = 16;  // fixed partition; results do not depend on threads
    bool interference_limited = false;
};

// SINR draws, stream s filling its own contiguous block.
std::vector<double> sample_sinr(const Environment& env, Watts own_power, const MonteCarloSpec& spec);

// Mean of f(γ) over the draws; blocks reduced in stream order.
template <class F>
double sinr_expectation(const Environment& env, Watts own_power, const MonteCarloSpec& spec, F&& f) {
    const std::vector<double> g = sample_sinr(env, own_power, spec);
    double sum = 0.0;
    for (double x : g) sum += f(x);
    return sum / static_cast<double>(g.size());
}

// Empirical CDF on `grid`; requires at least 10^4 samples.
std::vector<double> sinr_empirical_cdf(const Environment& env, Watts own_power, const MonteCarloSpec& spec,
                                       const std::vector<double>& grid);

// Fraction of sorted values <= x.
double empirical_cdf_at(const std::vector<double>& sorted, double x);

}  // namespace duplex::channel
