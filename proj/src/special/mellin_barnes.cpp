#include "duplex/special/mellin_barnes.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <exception>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "duplex/error.hpp"
#include "duplex/special/gamma.hpp"

namespace duplex::special {
namespace {

using cplx = std::complex<double>;
using Point = std::array<double, 2>;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kLogPi = 1.14472988584940017414;

// Search limits for contour placement when the pole-free region is unbounded.
constexpr double kSearchSpan = 1e4;
constexpr double kBoxBound = 1e3;
constexpr double kRadiusCap = 2.0;

// Pole-free half-space offset + normal·σ > 0 contributed by a numerator gamma.
struct Halfplane {
    Point normal;
    double offset;
    double norm;
};

double lgamma_real(double x) {
    int sign = 0;
    return ::lgamma_r(x, &sign);
}

bool is_constant(const GammaFactor& f) { return f.coef[0] == 0.0 && f.coef[1] == 0.0; }

void validate(const MellinBarnesKernel& k) {
    if (k.dims != 1 && k.dims != 2) throw ConfigError("Mellin-Barnes kernel: dims must be 1 or 2");
    for (const auto& f : k.factors) {
        if (f.power != 1 && f.power != -1) throw ConfigError("Mellin-Barnes kernel: power must be +1 or -1");
        if (!std::isfinite(f.offset) || !std::isfinite(f.coef[0]) || !std::isfinite(f.coef[1]))
            throw ConfigError("Mellin-Barnes kernel: non-finite gamma parameter");
        if (k.dims == 1 && f.coef[1] != 0.0)
            throw ConfigError("Mellin-Barnes kernel: second coefficient set on a one-variable kernel");
        if (is_constant(f) && f.power > 0 && f.offset <= 0.0 && f.offset == std::nearbyint(f.offset))
            throw ConfigError("Mellin-Barnes kernel: constant numerator gamma sits on a pole");
    }
    if (!std::isfinite(k.log_base[0]) || !std::isfinite(k.log_base[1]))
        throw ConfigError("Mellin-Barnes kernel: non-finite argument");
}

std::vector<Halfplane> pole_halfplanes(const MellinBarnesKernel& k) {
    std::vector<Halfplane> out;
    for (const auto& f : k.factors) {
        if (f.power < 0 || is_constant(f)) continue;
        out.push_back({f.coef, f.offset, std::hypot(f.coef[0], f.coef[1])});
    }
    return out;
}

double slack(const Halfplane& h, const Point& s) {
    return h.offset + h.normal[0] * s[0] + h.normal[1] * s[1];
}

double distance_to_poles(const std::vector<Halfplane>& hs, const Point& s) {
    double d = kInf;
    for (const auto& h : hs) d = std::min(d, slack(h, s) / h.norm);
    return d;
}

// log|K(σ)| on the real axis. Denominator gammas with small arguments use
// log π - log Γ(1-x), which drops the log|sin πx| spikes of log|Γ(x)|.
double real_log_magnitude(const MellinBarnesKernel& k, const Point& s) {
    double phi = k.log_base[0] * s[0] + k.log_base[1] * s[1];
    for (const auto& f : k.factors) {
        const double x = f.offset + f.coef[0] * s[0] + f.coef[1] * s[1];
        if (f.power > 0) {
            if (x <= 0.0) return kInf;
            phi += lgamma_real(x);
        } else {
            phi -= (x > 0.5) ? lgamma_real(x) : kLogPi - lgamma_real(1.0 - x);
        }
    }
    return phi;
}

template <class F>
double golden_minimize(F&& f, double a, double b) {
    if (!(b > a)) return 0.5 * (a + b);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a);
    double d = a + g * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int it = 0; it < 200 && (b - a) > 1e-9 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

// Feasible interval of coordinate i with the other coordinate fixed, for
// the region at distance >= delta from every pole hyperplane.
std::pair<double, double> coordinate_interval(const std::vector<Halfplane>& hs, const Point& s,
                                              std::size_t i, double delta) {
    double lo = -kInf;
    double hi = kInf;
    for (const auto& h : hs) {
        const double c = h.normal[i];
        if (c == 0.0) continue;
        const double rest = slack(h, s) - c * s[i];
        const double bound = (delta * h.norm - rest) / c;
        if (c > 0.0)
            lo = std::max(lo, bound);
        else
            hi = std::min(hi, bound);
    }
    if (!std::isfinite(lo) && !std::isfinite(hi)) {
        lo = s[i] - kSearchSpan;
        hi = s[i] + kSearchSpan;
    } else if (!std::isfinite(lo)) {
        lo = hi - kSearchSpan;
    } else if (!std::isfinite(hi)) {
        hi = lo + kSearchSpan;
    }
    return {lo, hi};
}

struct Placement {
    Point centre;
    double radius;
};

Placement chebyshev_1d(const std::vector<Halfplane>& hs) {
    double lo = -kInf;
    double hi = kInf;
    for (const auto& h : hs) {
        const double root = -h.offset / h.normal[0];
        if (h.normal[0] > 0.0)
            lo = std::max(lo, root);
        else
            hi = std::min(hi, root);
    }
    if (!(lo < hi)) throw ConfigError("contour: ascending and descending pole families overlap");
    if (std::isfinite(lo) && std::isfinite(hi)) return {{0.5 * (lo + hi), 0.0}, 0.5 * (hi - lo)};
    if (std::isfinite(lo)) return {{lo + 1.0, 0.0}, kInf};
    if (std::isfinite(hi)) return {{hi - 1.0, 0.0}, kInf};
    return {{0.0, 0.0}, kInf};
}

// Largest disc inside the pole-free polygon, by vertex enumeration of the
// linear program max r s.t. slack_j(σ) >= r·|normal_j|.  Ties go to the
// centre nearest the origin.
Placement chebyshev_2d(const std::vector<Halfplane>& hs) {
    struct Row {
        double x, y, r, rhs;  // x·σ1 + y·σ2 + r·ρ >= rhs
    };
    std::vector<Row> rows;
    for (const auto& h : hs) rows.push_back({h.normal[0], h.normal[1], -h.norm, -h.offset});
    rows.push_back({0.0, 0.0, -1.0, -kRadiusCap});
    rows.push_back({1.0, 0.0, 0.0, -kBoxBound});
    rows.push_back({-1.0, 0.0, 0.0, -kBoxBound});
    rows.push_back({0.0, 1.0, 0.0, -kBoxBound});
    rows.push_back({0.0, -1.0, 0.0, -kBoxBound});

    double best_r = -kInf;
    Point best{0.0, 0.0};
    const std::size_t n = rows.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            for (std::size_t k = j + 1; k < n; ++k) {
                const Row& a = rows[i];
                const Row& b = rows[j];
                const Row& c = rows[k];
                const double det = a.x * (b.y * c.r - b.r * c.y) - a.y * (b.x * c.r - b.r * c.x) +
                                   a.r * (b.x * c.y - b.y * c.x);
                if (std::abs(det) < 1e-12) continue;
                const double dx = a.rhs * (b.y * c.r - b.r * c.y) - a.y * (b.rhs * c.r - b.r * c.rhs) +
                                  a.r * (b.rhs * c.y - b.y * c.rhs);
                const double dy = a.x * (b.rhs * c.r - b.r * c.rhs) - a.rhs * (b.x * c.r - b.r * c.x) +
                                  a.r * (b.x * c.rhs - b.rhs * c.x);
                const double dr = a.x * (b.y * c.rhs - b.rhs * c.y) - a.y * (b.x * c.rhs - b.rhs * c.x) +
                                  a.rhs * (b.x * c.y - b.y * c.x);
                const double x = dx / det;
                const double y = dy / det;
                const double r = dr / det;
                bool feasible = true;
                for (const auto& row : rows) {
                    if (row.x * x + row.y * y + row.r * r < row.rhs - 1e-9 * (1.0 + std::abs(row.rhs))) {
                        feasible = false;
                        break;
                    }
                }
                if (!feasible) continue;
                const bool better = r > best_r + 1e-12 ||
                                    (r > best_r - 1e-12 && x * x + y * y < best[0] * best[0] + best[1] * best[1]);
                if (better) {
                    best_r = std::max(best_r, r);
                    best = {x, y};
                }
            }
        }
    }
    if (!(best_r > 1e-12)) throw ConfigError("contour: pole families of the two variables leave no gap");
    return {best, best_r};
}

Point saddle(const MellinBarnesKernel& k, const std::vector<Halfplane>& hs, const Placement& start, double margin) {
    const double delta = margin * std::min(start.radius, 1.0);
    Point s = start.centre;
    auto phi_along = [&](std::size_t i) {
        return [&, i](double v) {
            Point p = s;
            p[i] = v;
            return real_log_magnitude(k, p);
        };
    };
    for (int sweep = 0; sweep < 40; ++sweep) {
        const Point prev = s;
        for (std::size_t i = 0; i < k.dims; ++i) {
            auto [lo, hi] = coordinate_interval(hs, s, i, delta);
            if (lo > hi) continue;
            s[i] = golden_minimize(phi_along(i), lo, hi);
        }
        if (k.dims == 1) break;
        if (std::abs(s[0] - prev[0]) + std::abs(s[1] - prev[1]) < 1e-7 * (1.0 + std::abs(s[0]) + std::abs(s[1])))
            break;
    }
    return s;
}

cplx log_factor(const GammaFactor& f, cplx arg) {
    if (f.power < 0 && arg.imag() == 0.0 && arg.real() <= 0.0 && arg.real() == std::nearbyint(arg.real()))
        return {-kInf, 0.0};  // 1/Γ vanishes at the poles of Γ
    const cplx lg = log_gamma(arg);
    return f.power > 0 ? lg : -lg;
}

double max_real(const std::vector<cplx>& v) {
    double m = -kInf;
    for (const auto& x : v) m = std::max(m, x.real());
    return m;
}

std::vector<cplx> exp_shifted(const std::vector<cplx>& v, double shift) {
    std::vector<cplx> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::exp(v[i] - shift);
    return out;
}

double imag_tolerance(const ContourConfig& c, std::size_t dims) {
    if (c.imag_tol > 0.0) return c.imag_tol;
    return dims == 1 ? 1e-8 : 1e-6;
}

MellinBarnesResult finish(const MellinBarnesKernel& k, const ContourConfig& config, cplx sum,
                          double log_scale, double l1, double err, bool converged) {
    MellinBarnesResult r;
    const double re = sum.real();
    const double floor = 100.0 * kEps * l1;
    r.sign = re > 0.0 ? 1 : (re < 0.0 ? -1 : 0);
    r.log_abs = std::log(std::abs(re)) + log_scale;
    r.value = r.sign * std::exp(r.log_abs);
    r.imag = sum.imag() * std::exp(log_scale);
    r.log_l1 = std::log(l1) + log_scale;
    // Cancellation against the integrand mass bounds the attainable accuracy;
    // it is reported here and judged by the caller, which knows whether the
    // quantity needs relative or absolute accuracy.  Level-to-level changes
    // under the stopping floor are roundoff noise.
    const double noise = kEps * l1;
    const double achieved = std::max(err <= floor ? noise : err, noise);
    r.rel_error = std::abs(re) > 0.0 ? achieved / std::abs(re) : kInf;

    const bool within_abs = config.abs_tol > 0.0 && std::log(err) + log_scale <= std::log(config.abs_tol);
    if (!converged && err > floor && err > config.accuracy_target * std::abs(re) && !within_abs)
        throw AccuracyError("Mellin-Barnes quadrature did not reach the accuracy target (relative change " +
                                std::to_string(r.rel_error) + ")",
                            r.value, r.rel_error);
    const bool imag_within_abs =
        config.abs_tol > 0.0 && std::log(std::abs(sum.imag())) + log_scale <= std::log(config.abs_tol);
    if (std::abs(sum.imag()) > imag_tolerance(config, k.dims) * std::abs(re) && std::abs(sum.imag()) > floor &&
        !imag_within_abs)
        throw AccuracyError("Mellin-Barnes quadrature left a non-negligible imaginary part", r.value,
                            std::abs(sum.imag()) / std::abs(re));
    return r;
}

void check_config(const ContourConfig& c) {
    if (!(c.pole_margin > 0.0 && c.pole_margin < 1.0)) throw ConfigError("contour: pole_margin must lie in (0, 1)");
    if (!(c.abs_tol >= 0.0)) throw ConfigError("contour: abs_tol must be non-negative");
    if (!(c.half_extent > 0.0)) throw ConfigError("contour: half_extent must be positive");
    if (c.nodes < 4) throw ConfigError("contour: need at least 4 nodes");
    if (!(c.truncation_tol > 0.0) || !(c.rel_tol > 0.0) || !(c.accuracy_target > 0.0))
        throw ConfigError("contour: tolerances must be positive");
}

std::size_t half_count(double extent, double step) {
    return static_cast<std::size_t>(std::ceil(extent / step - 1e-9));
}

// ---------------------------------------------------------------- 1 variable

MellinBarnesResult integrate_1d(const MellinBarnesKernel& k, const ContourConfig& config, double sigma) {
    cplx log_const = 0.0;
    std::vector<GammaFactor> active;
    for (const auto& f : k.factors) {
        if (is_constant(f))
            log_const += log_factor(f, cplx(f.offset, 0.0));
        else
            active.push_back(f);
    }
    auto log_k = [&](double y) {
        const cplx s(sigma, y);
        cplx acc = k.log_base[0] * s + log_const;
        for (const auto& f : active) acc += log_factor(f, f.offset + f.coef[0] * s);
        return acc;
    };
    auto sample = [&](double h, std::size_t n) {
        std::vector<cplx> v(2 * n + 1);
        for (std::size_t i = 0; i <= 2 * n; ++i) v[i] = log_k((static_cast<double>(i) - static_cast<double>(n)) * h);
        return v;
    };

    double extent = config.half_extent;
    double h = config.initial_step();
    std::size_t evaluations = 0;
    std::vector<cplx> values;
    double peak = 0.0;
    double tail = 0.0;
    for (;;) {
        const std::size_t n = half_count(extent, h);
        if (2 * n + 1 > config.max_nodes)
            throw AccuracyError("Mellin-Barnes integrand does not decay along the contour", std::nan(""), kInf);
        values = sample(h, n);
        evaluations += values.size();
        peak = max_real(values);
        if (!std::isfinite(peak)) throw NumericalError("Mellin-Barnes integrand is not finite on the contour");
        tail = std::max(values.front().real(), values.back().real()) - peak;
        if (tail < std::log(config.truncation_tol)) break;
        extent *= 2.0;
    }
    const double scale = peak;
    auto level_sum = [&](const std::vector<cplx>& v, double step, double* l1) {
        cplx s = 0.0;
        double m = 0.0;
        for (const auto& x : v) {
            const cplx e = std::exp(x - scale);
            s += e;
            m += std::abs(e);
        }
        if (l1) *l1 = m * step / kTwoPi;
        return s * (step / kTwoPi);
    };
    double l1 = 0.0;
    cplx prev = level_sum(values, h, &l1);
    cplx sum = prev;
    double err = kInf;
    bool converged = false;
    int levels = 1;
    for (;;) {
        h *= 0.5;
        const std::size_t n = half_count(extent, h);
        if (2 * n + 1 > config.max_nodes) break;
        values = sample(h, n);
        evaluations += values.size();
        sum = level_sum(values, h, &l1);
        ++levels;
        err = std::abs(sum - prev);
        if (err <= config.rel_tol * std::abs(sum.real()) || err <= 100.0 * kEps * l1) {
            converged = true;
            break;
        }
        prev = sum;
    }
    MellinBarnesResult r = finish(k, config, sum, scale, l1, err, converged);
    r.axes[0] = {sigma, extent, h, values.size(), std::exp(tail)};
    r.evaluations = evaluations;
    r.levels = levels;
    return r;
}

// ---------------------------------------------------------------- 2 variables

struct JointTable {
    GammaFactor factor;
    long q = 0;        // lattice index = q·J + K
    bool lattice = false;
    long half = 0;     // table covers m ∈ [-half, half]
    std::vector<cplx> log_values;
};

struct Level {
    cplx sum;          // scaled by exp(-log_scale)
    double log_scale = 0.0;
    double l1 = 0.0;   // scaled like sum; only with diagnostics
    double tail[2] = {0.0, 0.0};
    std::size_t nodes = 0;
    std::size_t n[2] = {0, 0};
};

class Grid2 {
public:
    Grid2(const MellinBarnesKernel& k, Point sigma) : k_(k), sigma_(sigma) {
        for (const auto& f : k.factors) {
            if (is_constant(f))
                log_const_ += log_factor(f, cplx(f.offset, 0.0));
            else if (f.coef[1] == 0.0)
                axis_[0].push_back(f);
            else if (f.coef[0] == 0.0)
                axis_[1].push_back(f);
            else
                joint_.push_back(f);
        }
        if (!joint_.empty()) {
            const double rho = std::abs(joint_.front().coef[0] / joint_.front().coef[1]);
            step_ratio_ = std::max(1.0, std::round(rho)) / rho;
        }
    }

    // Axis-0 step for a given axis-1 step, chosen so every joint gamma of
    // the first family lands on a one-dimensional lattice.
    double step0(double h1) const { return step_ratio_ * h1; }

    Level evaluate(double h1, const double extent[2], bool diagnose) const {
        const double h[2] = {step0(h1), h1};
        Level lv;
        std::vector<cplx> axis_log[2];
        for (std::size_t d = 0; d < 2; ++d) {
            const std::size_t n = half_count(extent[d], h[d]);
            lv.n[d] = n;
            axis_log[d].resize(2 * n + 1);
            for (std::size_t i = 0; i <= 2 * n; ++i) {
                const cplx s(sigma_[d], (static_cast<double>(i) - static_cast<double>(n)) * h[d]);
                cplx acc = k_.log_base[d] * s;
                for (const auto& f : axis_[d]) acc += log_factor(f, f.offset + f.coef[d] * s);
                axis_log[d][i] = acc;
            }
        }
        const long n0 = static_cast<long>(lv.n[0]);
        const long n1 = static_cast<long>(lv.n[1]);
        lv.nodes = static_cast<std::size_t>((2 * n0 + 1) * (2 * n1 + 1));

        std::vector<JointTable> tables;
        std::vector<GammaFactor> direct;
        for (const auto& f : joint_) {
            const double q = f.coef[0] * h[0] / (f.coef[1] * h[1]);
            const double qr = std::round(q);
            if (std::abs(q - qr) > 1e-9 * std::max(1.0, std::abs(q)) || qr == 0.0) {
                direct.push_back(f);
                continue;
            }
            JointTable t;
            t.factor = f;
            t.q = static_cast<long>(qr);
            t.lattice = true;
            t.half = std::abs(t.q) * n0 + n1;
            t.log_values.resize(static_cast<std::size_t>(2 * t.half + 1));
            const cplx base(f.offset + f.coef[0] * sigma_[0] + f.coef[1] * sigma_[1], 0.0);
            for (long m = -t.half; m <= t.half; ++m)
                t.log_values[static_cast<std::size_t>(m + t.half)] =
                    log_factor(f, base + cplx(0.0, f.coef[1] * h[1] * static_cast<double>(m)));
            tables.push_back(std::move(t));
        }

        const double s0 = max_real(axis_log[0]);
        const double s1 = max_real(axis_log[1]);
        double log_scale = s0 + s1 + log_const_.real();
        std::vector<std::vector<cplx>> texp;
        for (const auto& t : tables) {
            const double st = max_real(t.log_values);
            log_scale += st;
            texp.push_back(exp_shifted(t.log_values, st));
        }
        if (!std::isfinite(log_scale)) throw NumericalError("Mellin-Barnes integrand is not finite on the contour");
        const std::vector<cplx> a = exp_shifted(axis_log[0], s0);
        const std::vector<cplx> b = exp_shifted(axis_log[1], s1);
        const cplx phase = std::exp(cplx(0.0, log_const_.imag()));
        const double weight = h[0] * h[1] / (kTwoPi * kTwoPi);
        const std::size_t w1 = static_cast<std::size_t>(2 * n1 + 1);

        cplx total = 0.0;
        if (tables.empty() && direct.empty()) {
            cplx sa = 0.0;
            cplx sb = 0.0;
            for (const auto& x : a) sa += x;
            for (const auto& x : b) sb += x;
            total = sa * sb;
        } else if (tables.size() == 1 && direct.empty()) {
            const JointTable& t = tables.front();
            const std::vector<cplx>& tv = texp.front();
            for (long j = -n0; j <= n0; ++j) {
                const cplx* row = tv.data() + (t.q * j - n1 + t.half);
                cplx acc = 0.0;
                for (std::size_t kk = 0; kk < w1; ++kk) acc += b[kk] * row[kk];
                total += a[static_cast<std::size_t>(j + n0)] * acc;
            }
        } else {
            std::vector<cplx> row(w1);
            for (long j = -n0; j <= n0; ++j) {
                for (long kk = -n1; kk <= n1; ++kk) {
                    cplx v = b[static_cast<std::size_t>(kk + n1)];
                    for (std::size_t ti = 0; ti < tables.size(); ++ti)
                        v *= texp[ti][static_cast<std::size_t>(tables[ti].q * j + kk + tables[ti].half)];
                    if (!direct.empty()) {
                        const cplx s_0(sigma_[0], static_cast<double>(j) * h[0]);
                        const cplx s_1(sigma_[1], static_cast<double>(kk) * h[1]);
                        cplx lg = 0.0;
                        for (const auto& f : direct) lg += log_factor(f, f.offset + f.coef[0] * s_0 + f.coef[1] * s_1);
                        v *= std::exp(lg);
                    }
                    row[static_cast<std::size_t>(kk + n1)] = v;
                }
                cplx acc = 0.0;
                for (const auto& x : row) acc += x;
                total += a[static_cast<std::size_t>(j + n0)] * acc;
            }
        }
        lv.sum = total * phase * weight;
        lv.log_scale = log_scale;

        if (diagnose) {
            // Magnitudes only: peak, boundary maxima per axis and the L1 norm.
            double peak = 0.0;
            double edge0 = 0.0;
            double edge1 = 0.0;
            double l1 = 0.0;
            for (long j = -n0; j <= n0; ++j) {
                const double ma = std::abs(a[static_cast<std::size_t>(j + n0)]);
                for (long kk = -n1; kk <= n1; ++kk) {
                    double m = ma * std::abs(b[static_cast<std::size_t>(kk + n1)]);
                    for (std::size_t ti = 0; ti < tables.size(); ++ti)
                        m *= std::abs(texp[ti][static_cast<std::size_t>(tables[ti].q * j + kk + tables[ti].half)]);
                    if (!direct.empty()) {
                        const cplx s_0(sigma_[0], static_cast<double>(j) * h[0]);
                        const cplx s_1(sigma_[1], static_cast<double>(kk) * h[1]);
                        double lg = 0.0;
                        for (const auto& f : direct)
                            lg += log_factor(f, f.offset + f.coef[0] * s_0 + f.coef[1] * s_1).real();
                        m *= std::exp(lg);
                    }
                    peak = std::max(peak, m);
                    l1 += m;
                    if (j == -n0 || j == n0) edge0 = std::max(edge0, m);
                    if (kk == -n1 || kk == n1) edge1 = std::max(edge1, m);
                }
            }
            lv.l1 = l1 * weight;
            lv.tail[0] = peak > 0.0 ? std::log(edge0 / peak) : 0.0;
            lv.tail[1] = peak > 0.0 ? std::log(edge1 / peak) : 0.0;
        }
        return lv;
    }

private:
    const MellinBarnesKernel& k_;
    Point sigma_;
    cplx log_const_ = 0.0;
    std::vector<GammaFactor> axis_[2];
    std::vector<GammaFactor> joint_;
    double step_ratio_ = 1.0;
};

MellinBarnesResult integrate_2d(const MellinBarnesKernel& k, const ContourConfig& config, const Point& sigma) {
    const Grid2 grid(k, sigma);
    double extent[2] = {config.half_extent, config.half_extent};
    double h1 = config.initial_step();
    const double log_tol = std::log(config.truncation_tol);
    std::size_t evaluations = 0;

    Level coarse;
    for (;;) {
        const double h0 = grid.step0(h1);
        const double nodes = (2.0 * std::ceil(extent[0] / h0) + 1.0) * (2.0 * std::ceil(extent[1] / h1) + 1.0);
        if (nodes > static_cast<double>(config.max_nodes))
            throw AccuracyError("Mellin-Barnes integrand does not decay along the contour", std::nan(""), kInf);
        coarse = grid.evaluate(h1, extent, true);
        evaluations += coarse.nodes;
        const bool grow0 = coarse.tail[0] > log_tol;
        const bool grow1 = coarse.tail[1] > log_tol;
        if (!grow0 && !grow1) break;
        if (grow0) extent[0] *= 2.0;
        if (grow1) extent[1] *= 2.0;
    }

    const double ref = coarse.log_scale;
    const double l1 = coarse.l1;
    cplx prev = coarse.sum;
    cplx sum = prev;
    Level last = coarse;
    double err = kInf;
    bool converged = false;
    int levels = 1;
    for (;;) {
        const double next = 0.5 * h1;
        const double h0 = grid.step0(next);
        const double nodes = (2.0 * std::ceil(extent[0] / h0) + 1.0) * (2.0 * std::ceil(extent[1] / next) + 1.0);
        if (nodes > static_cast<double>(config.max_nodes)) break;
        h1 = next;
        last = grid.evaluate(h1, extent, false);
        evaluations += last.nodes;
        ++levels;
        sum = last.sum * std::exp(last.log_scale - ref);
        err = std::abs(sum - prev);
        if (err <= config.rel_tol * std::abs(sum.real()) || err <= 100.0 * kEps * l1) {
            converged = true;
            break;
        }
        prev = sum;
    }
    MellinBarnesResult r = finish(k, config, sum, ref, l1, err, converged);
    r.axes[0] = {sigma[0], extent[0], grid.step0(h1), 2 * last.n[0] + 1, std::exp(coarse.tail[0])};
    r.axes[1] = {sigma[1], extent[1], h1, 2 * last.n[1] + 1, std::exp(coarse.tail[1])};
    r.evaluations = evaluations;
    r.levels = levels;
    return r;
}

}  // namespace

Contour::Contour(const MellinBarnesKernel& kernel, const ContourConfig& config) {
    validate(kernel);
    const auto hs = pole_halfplanes(kernel);
    if (!config.abscissa.empty()) {
        if (config.abscissa.size() != kernel.dims)
            throw ConfigError("contour: expected one abscissa per integration variable");
        abscissa_ = {config.abscissa[0], kernel.dims == 2 ? config.abscissa[1] : 0.0};
        pole_distance_ = distance_to_poles(hs, abscissa_);
        if (!(pole_distance_ > 0.0)) throw ConfigError("contour: abscissa does not separate the pole families");
        return;
    }
    const Placement p = kernel.dims == 1 ? chebyshev_1d(hs) : chebyshev_2d(hs);
    abscissa_ = config.rule == AbscissaRule::saddle ? saddle(kernel, hs, p, config.pole_margin) : p.centre;
    pole_distance_ = distance_to_poles(hs, abscissa_);
    if (!(pole_distance_ > 0.0)) throw ConfigError("contour: automatic placement failed to separate the poles");
}

namespace {

double abs_error(const MellinBarnesResult& r) { return r.rel_error * std::exp(r.log_abs); }

MellinBarnesResult integrate_once(const MellinBarnesKernel& kernel, const ContourConfig& config) {
    const Contour contour(kernel, config);
    if (kernel.dims == 1) return integrate_1d(kernel, config, contour.abscissa()[0]);
    return integrate_2d(kernel, config, contour.abscissa());
}

}  // namespace

MellinBarnesResult integrate(const MellinBarnesKernel& kernel, const ContourConfig& config) {
    check_config(config);
    if (config.rule != AbscissaRule::saddle || !config.abscissa.empty()) return integrate_once(kernel, config);

    // Far from the bulk the value is a small residue of a large integrand,
    // so a line closer to the dominant pole cancels less; too close and the
    // step refinement runs out of nodes.
    std::optional<MellinBarnesResult> best;
    std::exception_ptr failure;
    for (const double scale : {1.0, 0.4, 0.1}) {
        ContourConfig attempt = config;
        attempt.pole_margin = scale * config.pole_margin;
        try {
            const MellinBarnesResult r = integrate_once(kernel, attempt);
            if (r.rel_error <= config.accuracy_target || abs_error(r) <= config.abs_tol) return r;
            if (!best || r.rel_error < best->rel_error) best = r;
        } catch (const AccuracyError&) {
            if (!failure) failure = std::current_exception();
        }
    }
    if (best) return *best;
    std::rethrow_exception(failure);
}

}  // namespace duplex::special
