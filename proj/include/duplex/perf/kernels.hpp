#pragma once

#include "duplex/channel/model.hpp"
#include "duplex/special/fox_h.hpp"

namespace duplex::perf {

// γ = a·Z^{2/α} / (φ + b·G) with Z ~ Gamma(μ, 1), G ~ Gamma(N, 1).
struct SinrModel {
    double a = 1.0;
    double b = 1.0;
    double phi = 1.0;
    double alpha = 2.0;
    double mu = 1.0;
    double n = 1.0;
};

SinrModel make_model(const channel::Environment& env, Watts own_power, bool half_duplex = false);

// H-function parameter sets.  The bivariate sets use (z1, z2) =
// ((a/(φx))^{α/2}, φ/b) for the density and survival function,
// ((a/φ)^{α/2}, φ/b) for the rate and ((τ1 a/φ)^{α/2}, φ/b) for the BEP.
special::FoxH2Params pdf_params(const SinrModel& m);
special::FoxH2Params ccdf_params(const SinrModel& m);
special::FoxH2Params rate_params(const SinrModel& m);
special::FoxH2Params bep_params(const SinrModel& m, double tau2);

// Univariate sets of the interference-limited model, z = (a/(b x))^{α/2}
// for density and CDF, (a/b)^{α/2} for the rate, (τ1 a/b)^{α/2} for the BEP.
special::FoxH1Params il_pdf_params(const SinrModel& m);
special::FoxH1Params il_cdf_params(const SinrModel& m);
special::FoxH1Params il_rate_params(const SinrModel& m);
special::FoxH1Params il_bep_params(const SinrModel& m, double tau2);

namespace closed {
double pdf(const SinrModel& m, double x, const special::ContourConfig& c = {});
double ccdf(const SinrModel& m, double x, const special::ContourConfig& c = {});
double cdf(const SinrModel& m, double x, const special::ContourConfig& c = {});
double rate(const SinrModel& m, const special::ContourConfig& c = {});  // bit/s/Hz
double bep(const SinrModel& m, double tau1, double tau2, const special::ContourConfig& c = {});
}  // namespace closed

namespace limited {
double pdf(const SinrModel& m, double x, const special::ContourConfig& c = {});
double cdf(const SinrModel& m, double x, const special::ContourConfig& c = {});
double rate(const SinrModel& m, const special::ContourConfig& c = {});
double bep(const SinrModel& m, double tau1, double tau2, const special::ContourConfig& c = {});
double outage_asymptote(const SinrModel& m, double threshold);
}  // namespace limited

// Real-axis quadrature over the gamma law of the interference; no
// Mellin–Barnes machinery.  With phi = 0 these describe the limited model.
namespace reference {
double pdf(const SinrModel& m, double x);
double cdf(const SinrModel& m, double x);
double ccdf(const SinrModel& m, double x);
double rate(const SinrModel& m);
double bep(const SinrModel& m, double tau1, double tau2);
}  // namespace reference

}  // namespace duplex::perf
