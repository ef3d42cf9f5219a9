#pragma once

#include <complex>

namespace duplex::special {

enum class IncompleteKind { lower, upper };

// log|Γ(x)| for real x. Throws DomainError at x = 0, -1, -2, ...
double log_gamma(double x);

// Sign of Γ(x) (+1 or -1). Throws DomainError at the poles.
int gamma_sign(double x);

// Principal branch of log Γ(z): analytic in the plane cut along the
// negative real axis, real for z > 0.  Throws DomainError at the poles.
std::complex<double> log_gamma(std::complex<double> z);

// Non-regularized incomplete gamma functions γ(a, x) and Γ(a, x).
double incomplete_gamma(double a, double x, IncompleteKind kind);

// Regularized versions P(a, x) and Q(a, x) = 1 - P(a, x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

}  // namespace duplex::special
