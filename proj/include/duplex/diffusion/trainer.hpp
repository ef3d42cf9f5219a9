#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "duplex/contract/contract.hpp"
#include "duplex/diffusion/network.hpp"
#include "duplex/diffusion/policy.hpp"
#include "duplex/diffusion/replay.hpp"

namespace duplex::diffusion {

struct TrainConfig {
    int diffusion_steps = 10;
    double beta_first = 1e-4;
    double beta_last = 0.2;
    int hidden = 256;
    std::size_t batch_size = 512;
    double gamma = 0.95;
    double tau = 0.005;
    double explore_noise = 0.01;
    double policy_lr = 1e-5;
    double critic_lr = 1e-5;
    int episodes = 1000;
    int steps_per_episode = 1;
    std::size_t buffer_capacity = 100000;
    bool last_step_only = false;  // backprop through the final denoising step only
    std::uint64_t seed = 0;
    EnvEncoding encoding = EnvEncoding::defaults();

    void validate() const;
};

// y_i = r_i + γ·min(q1_i, q2_i).
Vector bellman_targets(const Vector& rewards, const Vector& q1_next, const Vector& q2_next, double gamma);

struct StepStats {
    double critic_loss = 0.0;  // mean over both critics
    double policy_loss = 0.0;
};

// The networks and optimizers of the generator.
class Trainer {
public:
    explicit Trainer(TrainConfig cfg);

    const TrainConfig& config() const { return cfg_; }
    const DiffusionSchedule& schedule() const { return schedule_; }

    // Critic regression, policy ascent, then soft target updates.  Throws
    // NumericalError on a non-finite loss or parameter.
    StepStats train_step(const std::vector<const Record*>& batch, channel::RandomStream& rng);

    // Min of the two online critics at (env, raw action) columns.
    Vector critic_value(const Matrix& env, const Matrix& raw_actions) const;

    DenseNet policy;
    DenseNet policy_target;
    DenseNet critic1;
    DenseNet critic2;
    DenseNet critic1_target;
    DenseNet critic2_target;

private:
    TrainConfig cfg_;
    DiffusionSchedule schedule_;
    Adam policy_opt_;
    Adam critic1_opt_;
    Adam critic2_opt_;
    long updates_ = 0;
};

// Environments the trainer observes, each with its QoS table.
class EnvSource {
public:
    explicit EnvSource(std::vector<std::shared_ptr<const contract::QoSTable>> tables);
    static EnvSource fixed(const contract::Environment& env);

    std::size_t size() const { return tables_.size(); }
    const contract::QoSTable& table(std::size_t i) const { return *tables_[i]; }
    const contract::QoSTable& draw(channel::RandomStream& rng) const;

private:
    std::vector<std::shared_ptr<const contract::QoSTable>> tables_;
};

struct TrainResult {
    std::unique_ptr<Trainer> trainer;
    std::vector<double> episode_reward;  // mean u_sir per episode, unscaled
    std::vector<double> critic_loss;     // per training step
};

// Algorithm loop: observe, denoise, explore, execute, store, learn.
TrainResult train(const EnvSource& source, const TrainConfig& cfg);

struct Inference {
    contract::Contract contract;
    contract::ContractSolution solution;
};

// Noise-free denoising for one environment.
Inference infer(const DenseNet& policy, const DiffusionSchedule& schedule, const contract::QoSTable& table,
                const EnvEncoding& encoding, std::uint64_t seed);

// Mean u_sir of `samples` noise-free draws.
double mean_policy_reward(const DenseNet& policy, const DiffusionSchedule& schedule,
                          const contract::QoSTable& table, const EnvEncoding& encoding, std::size_t samples,
                          std::uint64_t seed);

// Versioned JSON checkpoint of the policy and everything needed to run it.
struct Checkpoint {
    TrainConfig config;
    DiffusionSchedule schedule;
    DenseNet policy;
};

constexpr int kCheckpointVersion = 1;

void save_checkpoint(const std::string& path, const Checkpoint& cp);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace duplex::diffusion
