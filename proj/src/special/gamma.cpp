#include "duplex/special/gamma.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>

#include "duplex/error.hpp"

namespace duplex::special {
namespace {

using cplx = std::complex<double>;

constexpr double kPi = std::numbers::pi;
constexpr double kHalfLog2Pi = 0.91893853320467274178;
constexpr double kLogPi = 1.14472988584940017414;

// B_{2k} / (2k (2k-1)) for k = 1..8
constexpr std::array<double, 8> kStirling = {
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
};

// Below this modulus the argument is shifted upward before Stirling.
constexpr double kStirlingRadius = 10.0;

bool is_pole(double x) { return x <= 0.0 && x == std::nearbyint(x); }

cplx stirling(cplx z) {
    const cplx inv = 1.0 / z;
    const cplx inv2 = inv * inv;
    cplx series = 0.0;
    cplx power = inv;
    for (double c : kStirling) {
        series += c * power;
        power *= inv2;
    }
    return (z - 0.5) * std::log(z) - z + kHalfLog2Pi + series;
}

// Upper half-plane, Re z >= 0.5: recurrence then Stirling.  Summing the
// principal logs of z + k keeps the result on the principal branch.
cplx log_gamma_right(cplx z) {
    cplx shift = 0.0;
    while (std::abs(z) < kStirlingRadius) {
        shift += std::log(z);
        z += 1.0;
    }
    return stirling(z) - shift;
}

// log sin(pi z) for Im z > 0, continuous in z:
// sin(pi z) = (i/2) e^{-i pi z} (1 - e^{2 i pi z}).
cplx log_sin_pi_upper(cplx z) {
    const cplx e = std::exp(cplx(0.0, 2.0 * kPi) * z);
    return cplx(-std::log(2.0), 0.5 * kPi) - cplx(0.0, kPi) * z + std::log(1.0 - e);
}

}  // namespace

double log_gamma(double x) {
    if (std::isnan(x)) throw DomainError("log_gamma: NaN argument");
    if (is_pole(x)) throw DomainError("log_gamma: pole at non-positive integer");
    int sign = 0;
    return ::lgamma_r(x, &sign);
}

int gamma_sign(double x) {
    if (is_pole(x)) throw DomainError("gamma_sign: pole at non-positive integer");
    if (x > 0.0) return 1;
    // Γ alternates sign between consecutive negative integers.
    return (static_cast<long long>(std::floor(x)) % 2 == 0) ? 1 : -1;
}

cplx log_gamma(cplx z) {
    if (std::isnan(z.real()) || std::isnan(z.imag())) throw DomainError("log_gamma: NaN argument");
    if (z.imag() == 0.0) {
        const double x = z.real();
        const double lg = log_gamma(x);
        return {lg, gamma_sign(x) > 0 ? 0.0 : kPi};
    }
    if (z.imag() < 0.0) return std::conj(log_gamma(std::conj(z)));
    if (z.real() >= 0.5) return log_gamma_right(z);
    // Reflection; 1 - z lies in the lower half-plane with Re >= 0.5.
    return kLogPi - log_sin_pi_upper(z) - std::conj(log_gamma_right(std::conj(1.0 - z)));
}

double incomplete_gamma(double a, double x, IncompleteKind kind) {
    if (!(a > 0.0)) throw DomainError("incomplete_gamma: a must be positive");
    if (!(x >= 0.0)) throw DomainError("incomplete_gamma: x must be non-negative");
    if (kind == IncompleteKind::lower) return x == 0.0 ? 0.0 : boost::math::tgamma_lower(a, x);
    return x == 0.0 ? boost::math::tgamma(a) : boost::math::tgamma(a, x);
}

double gamma_p(double a, double x) {
    if (!(a > 0.0)) throw DomainError("gamma_p: a must be positive");
    if (!(x >= 0.0)) throw DomainError("gamma_p: x must be non-negative");
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    return boost::math::gamma_p(a, x);
}

double gamma_q(double a, double x) {
    if (!(a > 0.0)) throw DomainError("gamma_q: a must be positive");
    if (!(x >= 0.0)) throw DomainError("gamma_q: x must be non-negative");
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    return boost::math::gamma_q(a, x);
}

}  // namespace duplex::special
