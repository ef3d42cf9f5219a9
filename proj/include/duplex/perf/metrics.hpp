#pragma once

#include <string>

#include "duplex/channel/model.hpp"
#include "duplex/channel/sampling.hpp"
#include "duplex/special/mellin_barnes.hpp"

namespace duplex::perf {

using channel::Environment;
using channel::ModulationScheme;

enum class Method {
    closed_form,           // full model, bivariate H-function
    interference_limited,  // noise floor dropped, univariate H-function
    quadrature_reference,  // real-axis integrals over the fading laws
    monte_carlo,
};

struct EvalMethod {
    Method kind = Method::closed_form;
    channel::MonteCarloSpec mc;       // monte_carlo only
    special::ContourConfig contour;   // closed_form and interference_limited

    // Throws ConfigError when monte_carlo is selected with < 10^4 samples.
    void validate() const;

    static EvalMethod closed_form() { return {}; }
    static EvalMethod interference_limited() { return {Method::interference_limited, {}, {}}; }
    static EvalMethod quadrature() { return {Method::quadrature_reference, {}, {}}; }
    static EvalMethod monte_carlo(std::size_t samples, std::uint64_t seed);
};

enum class DuplexMode { full, half };

// Density and distribution of the SINR at the receiver whose own
// transmission leaks into it with power own_power.
double sinr_pdf(const Environment& env, Watts own_power, double x, const EvalMethod& method = {});
double sinr_cdf(const Environment& env, Watts own_power, double x, const EvalMethod& method = {});

enum class OutageMethod {
    exact,                 // full model CDF
    interference_limited,  // CDF with the noise floor dropped
    asymptotic,            // leading residue of the interference-limited CDF
    monte_carlo,
};

struct OutageResult {
    double value = 0.0;
    // Set when the asymptote is used with a noise floor above 1% of the
    // mean interference power.
    bool regime_warning = false;
    std::string note;
};

OutageResult outage_probability(const Environment& env, Watts own_power, double threshold, OutageMethod method,
                                const EvalMethod& options = {});

// Achievable rate in bit/s.  Half duplex: half the time share and no
// self-interference.
double achievable_rate(const Environment& env, Watts own_power, DuplexMode mode, const EvalMethod& method = {});

// Bit error probability averaged over the SINR distribution.
double bep(const Environment& env, Watts own_power, const ModulationScheme& modulation, const EvalMethod& method = {});

// Conditional error Γ(τ2, τ1 γ) / (2 Γ(τ2)).
double conditional_bep(const ModulationScheme& modulation, double sinr);

}  // namespace duplex::perf
