#pragma once

#include <array>
#include <string>
#include <vector>

#include "duplex/contract/contract.hpp"
#include "duplex/diffusion/network.hpp"

namespace duplex::diffusion {

struct DiffusionSchedule {
    int steps = 0;
    std::vector<double> betas;       // betas[i - 1] = β_i
    std::vector<double> alphas;      // 1 - β_i
    std::vector<double> alpha_bars;  // running products of alphas

    static DiffusionSchedule linear(int steps, double beta_first = 1e-4, double beta_last = 0.2);
    static DiffusionSchedule from_betas(std::vector<double> betas);

    // Throws ConfigError unless every β_i lies in (0, 1).
    void validate() const;
};

constexpr int kStepEmbedding = 16;
constexpr int kEnvComponents = 13;
constexpr int kActionDim = 2;

// Sinusoidal code of the denoising step i.
Vector step_embedding(int i, int dim = kStepEmbedding);

// Names of the encoded environment components, in encoding order.
const std::array<const char*, kEnvComponents>& env_component_names();

// Min-max ranges mapping each environment component to [-1, 1].  Powers
// are encoded in dBW.
struct EnvEncoding {
    std::array<contract::Bounds, kEnvComponents> ranges;

    static EnvEncoding defaults();
    std::array<double, kEnvComponents> raw(const contract::Environment& env) const;
    // Components outside their range are clamped; a zero-width range maps to 0.
    Vector encode(const contract::Environment& env) const;
};

// Denoiser input: [c^i; env; embedding(i)].
int policy_input_size();
// Critic input: [tanh(action); env].
int critic_input_size();

// 2 hidden layers of `hidden` units.
DenseNet make_policy_net(int hidden = 256);
DenseNet make_critic_net(int hidden = 256);

// Contract at the point tanh(raw) of [-1, 1]^2, scaled to the box.
contract::Contract squash(const Eigen::Vector2d& raw, const contract::ContractBox& box);

struct DenoiseResult {
    Eigen::Vector2d raw;      // c^0 plus exploration noise
    contract::Contract contract;
};

// Runs the reverse chain from c^N ~ N(0, I) down to c^0 (no added noise at
// i = 1), then adds N(0, explore_noise²) exploration noise before squashing.
DenoiseResult denoise_sample(const DenseNet& policy, const DiffusionSchedule& schedule, const Vector& env,
                             channel::RandomStream& rng, double explore_noise, const contract::ContractBox& box);

// Batched chain with the Gaussian draws given: noise[0] is c^N, noise[i]
// the draw added at step i (i >= 2; noise[1] is unused).  With tapes, keeps
// what backprop_chain needs.
struct ChainTape {
    std::vector<DenseNet::Tape> steps;  // steps[i - 1] for step i
};

Matrix denoise_batch(const DenseNet& policy, const DiffusionSchedule& schedule, const Matrix& env,
                     const std::vector<Matrix>& noise, ChainTape* tape = nullptr);

// Gradient of sum(upstream ⊙ c^0) with respect to the denoiser parameters,
// through all steps or through the last step only.
Vector backprop_chain(const DenseNet& policy, const DiffusionSchedule& schedule, const ChainTape& tape,
                      const Matrix& upstream, bool last_step_only);

// Gaussian draws for denoise_batch.
std::vector<Matrix> chain_noise(const DiffusionSchedule& schedule, Eigen::Index batch, channel::RandomStream& rng);

}  // namespace duplex::diffusion
