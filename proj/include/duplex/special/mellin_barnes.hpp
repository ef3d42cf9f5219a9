#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace duplex::special {

// A factor Γ(offset + coef[0]·s1 + coef[1]·s2)^power of a Mellin–Barnes
// integrand, power = +1 (numerator) or -1 (denominator).
struct GammaFactor {
    double offset = 0.0;
    std::array<double, 2> coef{0.0, 0.0};
    int power = 1;
};

// Integrand K(s) = Π Γ(...)^{±1} · exp(log_base · s), integrated as
// (2πi)^{-dims} ∫ K(s) ds along vertical lines Re s = σ.
struct MellinBarnesKernel {
    std::size_t dims = 1;
    std::vector<GammaFactor> factors;
    std::array<double, 2> log_base{0.0, 0.0};
};

enum class AbscissaRule {
    // Minimizes the real-axis integrand magnitude inside the pole-free
    // region shrunk by pole_margin times its inradius.  If the result is
    // limited by cancellation, integrate() retries with a margin ten times
    // smaller and keeps the more accurate result.
    saddle,
    // Centre of the pole-free gap (largest inscribed ball in 2-D).
    gap_midpoint,
};

struct ContourConfig {
    std::vector<double> abscissa;  // one per variable; empty = automatic
    AbscissaRule rule = AbscissaRule::saddle;
    double half_extent = 8.0;      // initial; doubled until the tails are negligible
    std::size_t nodes = 64;        // initial node count across [-half_extent, half_extent]
    double truncation_tol = 1e-12;
    double rel_tol = 1e-10;        // refinement stops here
    double accuracy_target = 1e-6; // AccuracyError above this
    double abs_tol = 0.0;          // absolute error accepted in integral units; 0 = relative only
    double imag_tol = 0.0;         // 0 = 1e-8 for one variable, 1e-6 for two
    double pole_margin = 0.5;      // saddle rule only, fraction of the inradius (capped at 1)
    std::size_t max_nodes = std::size_t{1} << 24;

    double initial_step() const { return 2.0 * half_extent / static_cast<double>(nodes); }
};

struct AxisDiagnostics {
    double abscissa = 0.0;
    double half_extent = 0.0;
    double step = 0.0;
    std::size_t nodes = 0;
    double tail_ratio = 0.0;  // boundary magnitude / peak magnitude
};

struct MellinBarnesResult {
    double value = 0.0;     // real part; may under/overflow, see log_abs
    double imag = 0.0;      // residual imaginary part, same scale as value
    double log_abs = 0.0;   // log|value|
    int sign = 0;
    double log_l1 = 0.0;    // log ∫|K| |ds| / (2π)^dims
    double rel_error = 0.0; // max(last refinement change, roundoff floor) / |value|
    std::array<AxisDiagnostics, 2> axes{};
    std::size_t evaluations = 0;
    int levels = 0;
};

// Validated choice of integration abscissae for a kernel.
class Contour {
public:
    // Throws ConfigError if the pole families overlap or an explicit
    // abscissa does not separate them.
    Contour(const MellinBarnesKernel& kernel, const ContourConfig& config);

    const std::array<double, 2>& abscissa() const { return abscissa_; }
    // Smallest distance from the abscissa to a pole hyperplane.
    double pole_distance() const { return pole_distance_; }

private:
    std::array<double, 2> abscissa_{0.0, 0.0};
    double pole_distance_ = 0.0;
};

MellinBarnesResult integrate(const MellinBarnesKernel& kernel, const ContourConfig& config);

}  // namespace duplex::special
