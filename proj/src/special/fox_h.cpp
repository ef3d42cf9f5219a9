#include "duplex/special/fox_h.hpp"

#include <cmath>

#include "duplex/error.hpp"

namespace duplex::special {
namespace {

void append_univariate(const FoxH1Params& p, std::size_t axis, std::vector<GammaFactor>& out) {
    auto coef = [axis](double c) {
        std::array<double, 2> v{0.0, 0.0};
        v[axis] = c;
        return v;
    };
    for (std::size_t j = 0; j < p.lower.size(); ++j) {
        const auto& [b, B] = p.lower[j];
        if (j < p.m)
            out.push_back({b, coef(B), 1});
        else
            out.push_back({1.0 - b, coef(-B), -1});
    }
    for (std::size_t j = 0; j < p.upper.size(); ++j) {
        const auto& [a, A] = p.upper[j];
        if (j < p.n)
            out.push_back({1.0 - a, coef(-A), 1});
        else
            out.push_back({a, coef(A), -1});
    }
}

FoxHResult wrap(const MellinBarnesResult& r) { return {r.value, r.log_abs, r.sign, r}; }

void check_z(double z) {
    if (!(z > 0.0) || !std::isfinite(z)) throw DomainError("Fox H: argument must be positive and finite");
}

}  // namespace

void FoxH1Params::validate() const {
    if (m > lower.size()) throw ConfigError("Fox H: m exceeds the number of lower pairs");
    if (n > upper.size()) throw ConfigError("Fox H: n exceeds the number of upper pairs");
    for (const auto& [a, A] : upper)
        if (!(A > 0.0) || !std::isfinite(a)) throw ConfigError("Fox H: upper coefficients A_j must be positive");
    for (const auto& [b, B] : lower)
        if (!(B > 0.0) || !std::isfinite(b)) throw ConfigError("Fox H: lower coefficients B_j must be positive");
}

void FoxH2Params::validate() const {
    first.validate();
    second.validate();
    if (joint_n > joint_upper.size()) throw ConfigError("Fox H: joint n exceeds the number of joint upper triples");
    auto check = [](const FoxTriple& t) {
        if (!std::isfinite(t.a) || !std::isfinite(t.A1) || !std::isfinite(t.A2))
            throw ConfigError("Fox H: non-finite joint coefficient");
        if (t.A1 == 0.0 && t.A2 == 0.0) throw ConfigError("Fox H: joint triple couples no variable");
    };
    for (const auto& t : joint_upper) check(t);
    for (const auto& t : joint_lower) check(t);
}

MellinBarnesKernel make_kernel(const FoxH1Params& params, double log_z) {
    params.validate();
    MellinBarnesKernel k;
    k.dims = 1;
    append_univariate(params, 0, k.factors);
    k.log_base = {-log_z, 0.0};
    return k;
}

MellinBarnesKernel make_kernel(const FoxH2Params& params, double log_z1, double log_z2) {
    params.validate();
    MellinBarnesKernel k;
    k.dims = 2;
    for (std::size_t j = 0; j < params.joint_upper.size(); ++j) {
        const auto& t = params.joint_upper[j];
        if (j < params.joint_n)
            k.factors.push_back({1.0 - t.a, {-t.A1, -t.A2}, 1});
        else
            k.factors.push_back({t.a, {t.A1, t.A2}, -1});
    }
    for (const auto& t : params.joint_lower) k.factors.push_back({1.0 - t.a, {-t.A1, -t.A2}, -1});
    append_univariate(params.first, 0, k.factors);
    append_univariate(params.second, 1, k.factors);
    k.log_base = {-log_z1, -log_z2};
    return k;
}

FoxHResult fox_h1(const FoxH1Params& params, double z, const ContourConfig& contour) {
    check_z(z);
    return fox_h1_log(params, std::log(z), contour);
}

FoxHResult fox_h2(const FoxH2Params& params, double z1, double z2, const ContourConfig& contour) {
    check_z(z1);
    check_z(z2);
    return fox_h2_log(params, std::log(z1), std::log(z2), contour);
}

FoxHResult fox_h1_log(const FoxH1Params& params, double log_z, const ContourConfig& contour) {
    return wrap(integrate(make_kernel(params, log_z), contour));
}

FoxHResult fox_h2_log(const FoxH2Params& params, double log_z1, double log_z2, const ContourConfig& contour) {
    return wrap(integrate(make_kernel(params, log_z1, log_z2), contour));
}

}  // namespace duplex::special
