#pragma once

#include <cstddef>
#include <vector>

#include "duplex/special/mellin_barnes.hpp"

namespace duplex::special {

// Coefficient pair (a_j, A_j) of a Fox H-function.
struct FoxPair {
    double a = 0.0;
    double A = 1.0;
};

// H^{m,n}_{p,q}[z | (a_j, A_j)_{1..p}; (b_j, B_j)_{1..q}] with the usual
// kernel Π_{j<m} Γ(b_j + B_j s) Π_{j<n} Γ(1 - a_j - A_j s) /
// (Π_{j>=m} Γ(1 - b_j - B_j s) Π_{j>=n} Γ(a_j + A_j s)) · z^{-s}.
struct FoxH1Params {
    std::size_t m = 0;
    std::size_t n = 0;
    std::vector<FoxPair> upper;  // p pairs
    std::vector<FoxPair> lower;  // q pairs

    void validate() const;
};

// Joint triple (a; A', A'') coupling both contour variables.
struct FoxTriple {
    double a = 0.0;
    double A1 = 0.0;
    double A2 = 0.0;
};

// Bivariate H-function of the form
//   H^{0,n_j : m1,n1 : m2,n2}_{p_j,q_j : p1,q1 : p2,q2}
// with joint kernel Π_{j<n_j} Γ(1 - a_j - A'_j s1 - A''_j s2) /
// (Π_{j>=n_j} Γ(a_j + A'_j s1 + A''_j s2) Π_j Γ(1 - b_j - B'_j s1 - B''_j s2))
// times the univariate kernels of `first` (in s1) and `second` (in s2).
// Joint coefficients may have either sign.
struct FoxH2Params {
    std::size_t joint_n = 0;
    std::vector<FoxTriple> joint_upper;
    std::vector<FoxTriple> joint_lower;
    FoxH1Params first;
    FoxH1Params second;

    void validate() const;
};

struct FoxHResult {
    double value = 0.0;
    double log_abs = 0.0;  // log|value|, usable when value under/overflows
    int sign = 0;
    MellinBarnesResult detail;
};

MellinBarnesKernel make_kernel(const FoxH1Params& params, double log_z);
MellinBarnesKernel make_kernel(const FoxH2Params& params, double log_z1, double log_z2);

// z > 0.  Throws ConfigError when the pole families cannot be separated and
// AccuracyError when the quadrature misses the accuracy target.
FoxHResult fox_h1(const FoxH1Params& params, double z, const ContourConfig& contour = {});
FoxHResult fox_h2(const FoxH2Params& params, double z1, double z2, const ContourConfig& contour = {});

// Same, taking log z; avoids overflow for extreme arguments.
FoxHResult fox_h1_log(const FoxH1Params& params, double log_z, const ContourConfig& contour = {});
FoxHResult fox_h2_log(const FoxH2Params& params, double log_z1, double log_z2, const ContourConfig& contour = {});

}  // namespace duplex::special
