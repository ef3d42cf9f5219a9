#include "duplex/diffusion/trainer.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "duplex/error.hpp"

namespace duplex::diffusion {

void TrainConfig::validate() const {
    if (diffusion_steps < 1) throw ConfigError("train: need at least one diffusion step");
    if (hidden < 1) throw ConfigError("train: hidden width must be positive");
    if (batch_size < 1) throw ConfigError("train: batch size must be positive");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("train: gamma must lie in [0, 1]");
    if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("train: tau must lie in (0, 1]");
    if (!(explore_noise >= 0.0)) throw ConfigError("train: exploration noise must be non-negative");
    if (!(policy_lr >= 0.0) || !(critic_lr >= 0.0)) throw ConfigError("train: learning rates must be non-negative");
    if (episodes < 0 || steps_per_episode < 1) throw ConfigError("train: bad episode counts");
    if (buffer_capacity < batch_size) throw ConfigError("train: buffer must hold at least one batch");
}

Vector bellman_targets(const Vector& rewards, const Vector& q1_next, const Vector& q2_next, double gamma) {
    return rewards + gamma * q1_next.cwiseMin(q2_next);
}

Trainer::Trainer(TrainConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    schedule_ = DiffusionSchedule::linear(cfg_.diffusion_steps, cfg_.beta_first, cfg_.beta_last);
    channel::RandomStream init(cfg_.seed, 0);
    policy = make_policy_net(cfg_.hidden);
    critic1 = make_critic_net(cfg_.hidden);
    critic2 = make_critic_net(cfg_.hidden);
    policy.initialize(init, true);  // zero drift: c⁰ starts broad over the box
    critic1.initialize(init);
    critic2.initialize(init);
    policy_target = policy;
    critic1_target = critic1;
    critic2_target = critic2;
    policy_opt_ = Adam(policy.parameter_count(), cfg_.policy_lr);
    critic1_opt_ = Adam(critic1.parameter_count(), cfg_.critic_lr);
    critic2_opt_ = Adam(critic2.parameter_count(), cfg_.critic_lr);
}

namespace {

Matrix critic_input(const Matrix& raw_actions, const Matrix& env) {
    Matrix x(critic_input_size(), env.cols());
    x.topRows(kActionDim) = raw_actions.array().tanh().matrix();
    x.bottomRows(kEnvComponents) = env;
    return x;
}

void check_finite(double value, const char* what, long step) {
    if (!std::isfinite(value)) {
        std::ostringstream os;
        os << "training diverged: " << what << " = " << value << " at update " << step;
        throw NumericalError(os.str());
    }
}

}  // namespace

Vector Trainer::critic_value(const Matrix& env, const Matrix& raw_actions) const {
    const Matrix x = critic_input(raw_actions, env);
    return critic1.forward(x).row(0).transpose().cwiseMin(critic2.forward(x).row(0).transpose());
}

StepStats Trainer::train_step(const std::vector<const Record*>& batch, channel::RandomStream& rng) {
    const Eigen::Index n = static_cast<Eigen::Index>(batch.size());
    if (n == 0) throw ConfigError("train_step: empty batch");
    Matrix env(kEnvComponents, n);
    Matrix actions(kActionDim, n);
    Vector rewards(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        env.col(k) = batch[static_cast<std::size_t>(k)]->env;
        actions.col(k) = batch[static_cast<std::size_t>(k)]->action;
        rewards[k] = batch[static_cast<std::size_t>(k)]->reward;
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    StepStats stats;

    // Critics regress toward the double-critic target at the target
    // policy's next contract.
    const Matrix next = denoise_batch(policy_target, schedule_, env, chain_noise(schedule_, n, rng));
    const Matrix x_next = critic_input(next, env);
    const Vector y = bellman_targets(rewards, critic1_target.forward(x_next).row(0).transpose(),
                                     critic2_target.forward(x_next).row(0).transpose(), cfg_.gamma);
    const Matrix x = critic_input(actions, env);
    auto fit = [&](DenseNet& net, Adam& opt) {
        DenseNet::Tape tape;
        const Vector q = net.forward(x, &tape).row(0).transpose();
        const Vector diff = q - y;
        Vector grad = Vector::Zero(static_cast<Eigen::Index>(net.parameter_count()));
        net.backward(tape, (2.0 * inv_n * diff).transpose(), grad);
        opt.step(net.parameters(), grad);
        return diff.squaredNorm() * inv_n;
    };
    stats.critic_loss = 0.5 * (fit(critic1, critic1_opt_) + fit(critic2, critic2_opt_));
    check_finite(stats.critic_loss, "critic loss", updates_);

    // Policy ascends the smaller critic at its own denoised contracts.
    ChainTape chain;
    const Matrix c0 = denoise_batch(policy, schedule_, env, chain_noise(schedule_, n, rng), &chain);
    const Matrix xp = critic_input(c0, env);
    DenseNet::Tape t1;
    DenseNet::Tape t2;
    const Vector q1 = critic1.forward(xp, &t1).row(0).transpose();
    const Vector q2 = critic2.forward(xp, &t2).row(0).transpose();
    Matrix up1 = Matrix::Zero(1, n);
    Matrix up2 = Matrix::Zero(1, n);
    double value = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        if (q1[k] <= q2[k]) {
            up1(0, k) = -inv_n;
            value += q1[k];
        } else {
            up2(0, k) = -inv_n;
            value += q2[k];
        }
    }
    stats.policy_loss = -value * inv_n;
    check_finite(stats.policy_loss, "policy loss", updates_);
    Vector scratch1 = Vector::Zero(static_cast<Eigen::Index>(critic1.parameter_count()));
    Vector scratch2 = Vector::Zero(static_cast<Eigen::Index>(critic2.parameter_count()));
    const Matrix dx = critic1.backward(t1, up1, scratch1) + critic2.backward(t2, up2, scratch2);
    const Matrix d_c0 = dx.topRows(kActionDim).array() * (1.0 - xp.topRows(kActionDim).array().square());
    const Vector pgrad = backprop_chain(policy, schedule_, chain, d_c0, cfg_.last_step_only);
    policy_opt_.step(policy.parameters(), pgrad);

    soft_update(policy_target, policy, cfg_.tau);
    soft_update(critic1_target, critic1, cfg_.tau);
    soft_update(critic2_target, critic2, cfg_.tau);
    ++updates_;
    if (!policy.finite() || !critic1.finite() || !critic2.finite()) {
        std::ostringstream os;
        os << "training diverged: non-finite parameters after update " << updates_ << " (critic loss "
           << stats.critic_loss << ", policy loss " << stats.policy_loss << ")";
        throw NumericalError(os.str());
    }
    return stats;
}

EnvSource::EnvSource(std::vector<std::shared_ptr<const contract::QoSTable>> tables) : tables_(std::move(tables)) {
    if (tables_.empty()) throw ConfigError("environment source: no environments");
}

EnvSource EnvSource::fixed(const contract::Environment& env) {
    return EnvSource({std::make_shared<const contract::QoSTable>(env, contract::default_qos_config(env))});
}

const contract::QoSTable& EnvSource::draw(channel::RandomStream& rng) const {
    return tables_.size() == 1 ? *tables_[0] : *tables_[rng.below(tables_.size())];
}

TrainResult train(const EnvSource& source, const TrainConfig& cfg) {
    TrainResult result;
    result.trainer = std::make_unique<Trainer>(cfg);
    Trainer& t = *result.trainer;
    ReplayBuffer buffer(cfg.buffer_capacity);
    channel::RandomStream act(cfg.seed, 1);
    channel::RandomStream learn(cfg.seed, 2);
    result.episode_reward.reserve(static_cast<std::size_t>(cfg.episodes));
    for (int episode = 0; episode < cfg.episodes; ++episode) {
        double total = 0.0;
        for (int step = 0; step < cfg.steps_per_episode; ++step) {
            const contract::QoSTable& table = source.draw(act);
            const contract::Environment& env = table.environment();
            const Vector e = cfg.encoding.encode(env);
            const DenoiseResult d =
                denoise_sample(t.policy, t.schedule(), e, act, cfg.explore_noise, contract::default_box(env));
            const double u = contract::evaluate_contract(d.contract, table).u_sir;
            total += u;
            buffer.push({e, d.raw, u / env.qos_value});
            if (buffer.size() >= cfg.batch_size)
                result.critic_loss.push_back(t.train_step(buffer.sample(cfg.batch_size, learn), learn).critic_loss);
        }
        result.episode_reward.push_back(total / cfg.steps_per_episode);
    }
    return result;
}

Inference infer(const DenseNet& policy, const DiffusionSchedule& schedule, const contract::QoSTable& table,
                const EnvEncoding& encoding, std::uint64_t seed) {
    channel::RandomStream rng(seed, 3);
    const contract::Environment& env = table.environment();
    const DenoiseResult d = denoise_sample(policy, schedule, encoding.encode(env), rng, 0.0, contract::default_box(env));
    return {d.contract, contract::evaluate_contract(d.contract, table)};
}

double mean_policy_reward(const DenseNet& policy, const DiffusionSchedule& schedule,
                          const contract::QoSTable& table, const EnvEncoding& encoding, std::size_t samples,
                          std::uint64_t seed) {
    if (samples == 0) throw ConfigError("policy reward: need at least one sample");
    channel::RandomStream rng(seed, 4);
    const contract::Environment& env = table.environment();
    const Eigen::Index n = static_cast<Eigen::Index>(samples);
    const Matrix e = encoding.encode(env).replicate(1, n);
    const Matrix c0 = denoise_batch(policy, schedule, e, chain_noise(schedule, n, rng));
    const contract::ContractBox box = contract::default_box(env);
    double sum = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) sum += contract::evaluate_contract(squash(c0.col(k), box), table).u_sir;
    return sum / static_cast<double>(samples);
}

namespace {

using nlohmann::json;

json bounds_json(const contract::Bounds& b) { return json::array({b.lo, b.hi}); }
contract::Bounds bounds_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& cp) {
    const TrainConfig& c = cp.config;
    json j;
    j["format"] = "duplex-diffusion-policy";
    j["version"] = kCheckpointVersion;
    j["config"] = {{"diffusion_steps", c.diffusion_steps}, {"beta_first", c.beta_first},
                   {"beta_last", c.beta_last},             {"hidden", c.hidden},
                   {"batch_size", c.batch_size},           {"gamma", c.gamma},
                   {"tau", c.tau},                         {"explore_noise", c.explore_noise},
                   {"policy_lr", c.policy_lr},             {"critic_lr", c.critic_lr},
                   {"episodes", c.episodes},               {"steps_per_episode", c.steps_per_episode},
                   {"buffer_capacity", c.buffer_capacity}, {"last_step_only", c.last_step_only},
                   {"seed", c.seed}};
    json ranges = json::object();
    for (int k = 0; k < kEnvComponents; ++k)
        ranges[env_component_names()[static_cast<std::size_t>(k)]] =
            bounds_json(c.encoding.ranges[static_cast<std::size_t>(k)]);
    j["encoding"] = ranges;
    j["schedule"] = {{"betas", cp.schedule.betas}};
    j["policy"] = {{"sizes", cp.policy.sizes()},
                   {"parameters", std::vector<double>(cp.policy.parameters().data(),
                                                      cp.policy.parameters().data() + cp.policy.parameters().size())}};
    std::ofstream out(path);
    if (!out) throw ConfigError("checkpoint: cannot write " + path);
    out << j.dump();
    if (!out) throw ConfigError("checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("checkpoint: cannot read " + path);
    json j;
    try {
        j = json::parse(in);
        if (j.at("format") != "duplex-diffusion-policy") throw ConfigError("checkpoint: not a policy checkpoint");
        if (j.at("version").get<int>() != kCheckpointVersion)
            throw ConfigError("checkpoint: unsupported version " + j.at("version").dump());
        Checkpoint cp;
        const json& c = j.at("config");
        TrainConfig& t = cp.config;
        t.diffusion_steps = c.at("diffusion_steps");
        t.beta_first = c.at("beta_first");
        t.beta_last = c.at("beta_last");
        t.hidden = c.at("hidden");
        t.batch_size = c.at("batch_size");
        t.gamma = c.at("gamma");
        t.tau = c.at("tau");
        t.explore_noise = c.at("explore_noise");
        t.policy_lr = c.at("policy_lr");
        t.critic_lr = c.at("critic_lr");
        t.episodes = c.at("episodes");
        t.steps_per_episode = c.at("steps_per_episode");
        t.buffer_capacity = c.at("buffer_capacity");
        t.last_step_only = c.at("last_step_only");
        t.seed = c.at("seed");
        for (int k = 0; k < kEnvComponents; ++k)
            t.encoding.ranges[static_cast<std::size_t>(k)] =
                bounds_from(j.at("encoding").at(env_component_names()[static_cast<std::size_t>(k)]));
        cp.schedule = DiffusionSchedule::from_betas(j.at("schedule").at("betas").get<std::vector<double>>());
        cp.policy = DenseNet(j.at("policy").at("sizes").get<std::vector<int>>());
        const auto params = j.at("policy").at("parameters").get<std::vector<double>>();
        if (params.size() != cp.policy.parameter_count())
            throw ConfigError("checkpoint: parameter count does not match the layer sizes");
        cp.policy.parameters() = Eigen::Map<const Vector>(params.data(), static_cast<Eigen::Index>(params.size()));
        if (cp.policy.input_size() != policy_input_size() || cp.policy.output_size() != kActionDim)
            throw ConfigError("checkpoint: policy shape does not match the encoding");
        return cp;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("checkpoint: malformed file: ") + e.what());
    }
}

}  // namespace duplex::diffusion
