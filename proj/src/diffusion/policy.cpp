#include "duplex/diffusion/policy.hpp"

#include <algorithm>
#include <cmath>

#include "duplex/error.hpp"

namespace duplex::diffusion {

DiffusionSchedule DiffusionSchedule::linear(int steps, double beta_first, double beta_last) {
    if (steps < 1) throw ConfigError("diffusion schedule: need at least one step");
    std::vector<double> betas(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i) {
        const double t = steps == 1 ? 0.0 : static_cast<double>(i) / (steps - 1);
        betas[static_cast<std::size_t>(i)] = beta_first + t * (beta_last - beta_first);
    }
    return from_betas(std::move(betas));
}

DiffusionSchedule DiffusionSchedule::from_betas(std::vector<double> betas) {
    DiffusionSchedule s;
    s.steps = static_cast<int>(betas.size());
    s.betas = std::move(betas);
    s.validate();
    double bar = 1.0;
    for (double b : s.betas) {
        s.alphas.push_back(1.0 - b);
        bar *= 1.0 - b;
        s.alpha_bars.push_back(bar);
    }
    return s;
}

void DiffusionSchedule::validate() const {
    if (steps < 1 || betas.size() != static_cast<std::size_t>(steps))
        throw ConfigError("diffusion schedule: need one beta per step");
    for (double b : betas)
        if (!(b > 0.0 && b < 1.0)) throw ConfigError("diffusion schedule: betas must lie in (0, 1)");
}

Vector step_embedding(int i, int dim) {
    Vector e(dim);
    const int half = dim / 2;
    for (int k = 0; k < half; ++k) {
        const double freq = std::pow(1e4, -static_cast<double>(k) / half);
        e[2 * k] = std::sin(i * freq);
        e[2 * k + 1] = std::cos(i * freq);
    }
    if (dim % 2) e[dim - 1] = 0.0;
    return e;
}

const std::array<const char*, kEnvComponents>& env_component_names() {
    static const std::array<const char*, kEnvComponents> names = {
        "qos_value",       "power_cost",  "distance_m",      "path_loss_exponent", "alpha",
        "mu",              "noise_variance", "si_variance",  "si_cancellation",    "interferer_power_dbw",
        "interference_scale", "interferer_count", "peer_power_dbw"};
    return names;
}

EnvEncoding EnvEncoding::defaults() {
    return {{{{100.0, 2000.0},
              {0.0, 0.1},
              {1.0, 20.0},
              {2.0, 15.0},
              {1.0, 5.0},
              {0.5, 6.0},
              {0.01, 1.0},
              {0.01, 1.0},
              {0.0, 1.0},
              {-10.0, 10.0},
              {0.05, 1.0},
              {1.0, 5.0},
              {0.0, 30.0}}}};
}

std::array<double, kEnvComponents> EnvEncoding::raw(const contract::Environment& e) const {
    return {e.qos_value,
            e.power_cost,
            e.distance_m,
            e.path_loss_exponent,
            e.fading.alpha(),
            e.fading.mu(),
            e.noise_variance,
            e.si_variance,
            e.si_cancellation,
            watts_to_dbw(e.interferer_power),
            e.interference_scale,
            static_cast<double>(e.interferer_count),
            watts_to_dbw(e.peer_power)};
}

Vector EnvEncoding::encode(const contract::Environment& env) const {
    const auto values = raw(env);
    Vector v(kEnvComponents);
    for (int k = 0; k < kEnvComponents; ++k) {
        const auto& r = ranges[static_cast<std::size_t>(k)];
        const double width = r.hi - r.lo;
        v[k] = width > 0.0 ? std::clamp(2.0 * (values[static_cast<std::size_t>(k)] - r.lo) / width - 1.0, -1.0, 1.0)
                           : 0.0;
    }
    return v;
}

int policy_input_size() { return kActionDim + kEnvComponents + kStepEmbedding; }
int critic_input_size() { return kActionDim + kEnvComponents; }

DenseNet make_policy_net(int hidden) { return DenseNet({policy_input_size(), hidden, hidden, kActionDim}); }
DenseNet make_critic_net(int hidden) { return DenseNet({critic_input_size(), hidden, hidden, 1}); }

contract::Contract squash(const Eigen::Vector2d& raw, const contract::ContractBox& box) {
    auto to_box = [](double x, contract::Bounds b) {
        const double u = 0.5 * (std::tanh(x) + 1.0);
        return std::clamp(b.lo + u * (b.hi - b.lo), b.lo, b.hi);
    };
    return {to_box(raw[0], box.c_q), to_box(raw[1], box.c_f)};
}

namespace {

double drift(const DiffusionSchedule& s, int i) {
    const std::size_t k = static_cast<std::size_t>(i - 1);
    return s.betas[k] / std::sqrt(s.alphas[k] * (1.0 - s.alpha_bars[k]));
}

Matrix policy_input(const Matrix& c, const Matrix& env, int i) {
    Matrix x(policy_input_size(), c.cols());
    x.topRows(kActionDim) = c;
    x.middleRows(kActionDim, kEnvComponents) = env;
    x.bottomRows(kStepEmbedding) = step_embedding(i).replicate(1, c.cols());
    return x;
}

}  // namespace

std::vector<Matrix> chain_noise(const DiffusionSchedule& schedule, Eigen::Index batch, channel::RandomStream& rng) {
    std::vector<Matrix> z(static_cast<std::size_t>(schedule.steps + 1));
    for (int i = 0; i <= schedule.steps; ++i) {
        Matrix& m = z[static_cast<std::size_t>(i)];
        m.resize(kActionDim, batch);
        if (i == 1) {
            m.setZero();
            continue;
        }
        for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = rng.normal();
    }
    return z;
}

Matrix denoise_batch(const DenseNet& policy, const DiffusionSchedule& schedule, const Matrix& env,
                     const std::vector<Matrix>& noise, ChainTape* tape) {
    if (env.rows() != kEnvComponents) throw ConfigError("denoise: environment encoding has the wrong size");
    if (noise.size() != static_cast<std::size_t>(schedule.steps + 1))
        throw ConfigError("denoise: need one noise draw per step plus the start");
    if (tape) tape->steps.assign(static_cast<std::size_t>(schedule.steps), {});
    Matrix c = noise[0];
    for (int i = schedule.steps; i >= 1; --i) {
        const std::size_t k = static_cast<std::size_t>(i - 1);
        const Matrix eps = policy.forward(policy_input(c, env, i), tape ? &tape->steps[k] : nullptr);
        c = c / std::sqrt(schedule.alphas[k]) - drift(schedule, i) * eps;
        if (i > 1) c += std::sqrt(schedule.betas[k]) * noise[static_cast<std::size_t>(i)];
    }
    return c;
}

Vector backprop_chain(const DenseNet& policy, const DiffusionSchedule& schedule, const ChainTape& tape,
                      const Matrix& upstream, bool last_step_only) {
    Vector grad = Vector::Zero(static_cast<Eigen::Index>(policy.parameter_count()));
    Matrix g = upstream;  // dL/dc^{i-1}
    const int last = last_step_only ? 1 : schedule.steps;
    for (int i = 1; i <= last; ++i) {
        const std::size_t k = static_cast<std::size_t>(i - 1);
        const Matrix d_eps = -drift(schedule, i) * g;
        const Matrix d_input = policy.backward(tape.steps[k], d_eps, grad);
        g = g / std::sqrt(schedule.alphas[k]) + d_input.topRows(kActionDim);
    }
    return grad;
}

DenoiseResult denoise_sample(const DenseNet& policy, const DiffusionSchedule& schedule, const Vector& env,
                             channel::RandomStream& rng, double explore_noise, const contract::ContractBox& box) {
    const std::vector<Matrix> noise = chain_noise(schedule, 1, rng);
    DenoiseResult r;
    r.raw = denoise_batch(policy, schedule, env, noise).col(0);
    if (explore_noise > 0.0) {
        r.raw[0] += explore_noise * rng.normal();
        r.raw[1] += explore_noise * rng.normal();
    }
    r.contract = squash(r.raw, box);
    return r;
}

}  // namespace duplex::diffusion
