#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <set>

#include "duplex/channel/random.hpp"
#include "duplex/diffusion/trainer.hpp"
#include "duplex/error.hpp"
#include "fixtures.hpp"

using namespace duplex;
using namespace duplex::diffusion;

namespace {

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, channel::RandomStream& rng) {
    Matrix m(rows, cols);
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = rng.normal();
    return m;
}

// Largest |analytic - numeric| relative to max(1e-3, |numeric|) over sampled
// coordinates, central differences with step h.
template <class Loss>
double gradient_mismatch(Vector& params, const Vector& analytic, Loss loss, channel::RandomStream& rng,
                         int probes = 100, double h = 1e-5) {
    double worst = 0.0;
    for (int p = 0; p < probes; ++p) {
        const Eigen::Index k = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(params.size())));
        const double saved = params[k];
        params[k] = saved + h;
        const double up = loss();
        params[k] = saved - h;
        const double down = loss();
        params[k] = saved;
        const double numeric = (up - down) / (2.0 * h);
        worst = std::max(worst, std::abs(analytic[k] - numeric) / std::max(1e-3, std::abs(numeric)));
    }
    return worst;
}

const contract::QoSTable& small_market_table() {
    static const contract::QoSTable table = [] {
        const contract::Environment env = fixtures::market_env();
        return contract::QoSTable(env, contract::default_qos_config(env, contract::power_grid(8)));
    }();
    return table;
}

TrainConfig tiny_config() {
    TrainConfig c;
    c.diffusion_steps = 4;
    c.hidden = 16;
    c.batch_size = 16;
    c.buffer_capacity = 256;
    c.episodes = 40;
    c.policy_lr = 1e-3;
    c.critic_lr = 1e-3;
    c.tau = 0.05;
    return c;
}

std::vector<Record> random_records(std::size_t n, channel::RandomStream& rng) {
    std::vector<Record> out;
    for (std::size_t i = 0; i < n; ++i) {
        Record r;
        r.env = random_matrix(kEnvComponents, 1, rng).col(0).cwiseMax(-1.0).cwiseMin(1.0);
        r.action = random_matrix(kActionDim, 1, rng).col(0);
        r.reward = std::tanh(r.action[0]) - 0.5 * r.action[1] * r.action[1];
        out.push_back(r);
    }
    return out;
}

std::vector<const Record*> pointers(const std::vector<Record>& records) {
    std::vector<const Record*> out;
    for (const Record& r : records) out.push_back(&r);
    return out;
}

}  // namespace

TEST_CASE("dense network gradients match central differences") {
    channel::RandomStream rng(11);
    DenseNet net({5, 7, 6, 3});
    net.initialize(rng);
    for (Eigen::Index k = 0; k < net.parameters().size(); ++k) net.parameters()[k] += 0.1 * rng.normal();
    const Matrix x = random_matrix(5, 4, rng);
    const Matrix u = random_matrix(3, 4, rng);
    auto loss = [&] { return (net.forward(x).array() * u.array()).sum(); };

    DenseNet::Tape tape;
    net.forward(x, &tape);
    Vector grad = Vector::Zero(static_cast<Eigen::Index>(net.parameter_count()));
    const Matrix dx = net.backward(tape, u, grad);
    CHECK(gradient_mismatch(net.parameters(), grad, loss, rng) < 1e-4);

    // Input gradient, every coordinate.
    Matrix xp = x;
    double worst = 0.0;
    for (Eigen::Index k = 0; k < xp.size(); ++k) {
        const double saved = xp.data()[k];
        xp.data()[k] = saved + 1e-5;
        const double up = (net.forward(xp).array() * u.array()).sum();
        xp.data()[k] = saved - 1e-5;
        const double down = (net.forward(xp).array() * u.array()).sum();
        xp.data()[k] = saved;
        const double numeric = (up - down) / 2e-5;
        worst = std::max(worst, std::abs(dx.data()[k] - numeric) / std::max(1e-3, std::abs(numeric)));
    }
    CHECK(worst < 1e-4);

    // Gradients accumulate.
    Vector twice = grad;
    net.backward(tape, u, twice);
    CHECK((twice - 2.0 * grad).norm() <= 1e-12 * grad.norm());

    // The closure form agrees.
    const NetEval ev = net_eval(net, x);
    CHECK((ev.output - net.forward(x)).norm() == 0.0);
    CHECK((ev.gradient(u) - grad).norm() <= 1e-12 * grad.norm());
}

TEST_CASE("network shape checks and zero output layer") {
    channel::RandomStream rng(3);
    DenseNet net({4, 8, 2});
    net.initialize(rng, true);
    CHECK(net.forward(random_matrix(4, 5, rng)).norm() == 0.0);
    CHECK_THROWS_AS(net.forward(random_matrix(3, 5, rng)), ConfigError);
    CHECK_THROWS_AS(DenseNet({4}), ConfigError);
    CHECK_THROWS_AS(DenseNet({4, 0, 2}), ConfigError);
    CHECK(net.parameter_count() == 8u * 5u + 2u * 9u);
    CHECK(net.finite());
    net.parameters()[0] = std::nan("");
    CHECK_FALSE(net.finite());
}

TEST_CASE("soft update") {
    channel::RandomStream rng(5);
    DenseNet a({3, 4, 1});
    DenseNet b({3, 4, 1});
    a.initialize(rng);
    b.initialize(rng);
    const Vector a0 = a.parameters();
    const Vector b0 = b.parameters();
    soft_update(a, b, 0.25);
    CHECK((a.parameters() - (0.25 * b0 + 0.75 * a0)).cwiseAbs().maxCoeff() < 1e-12);
    soft_update(a, b, 1.0);
    CHECK(a.parameters() == b0);
    DenseNet c({3, 5, 1});
    CHECK_THROWS_AS(soft_update(c, b, 0.5), ConfigError);
}

TEST_CASE("Adam first step moves each parameter by the learning rate against the gradient") {
    Adam opt(3, 0.01);
    Vector p = Vector::Zero(3);
    Vector g(3);
    g << 2.0, -0.5, 1e-3;
    opt.step(p, g);
    CHECK(p[0] == doctest::Approx(-0.01).epsilon(1e-6));
    CHECK(p[1] == doctest::Approx(0.01).epsilon(1e-6));
    CHECK(p[2] == doctest::Approx(-0.01).epsilon(1e-4));
    CHECK(opt.steps() == 1);
    CHECK_THROWS_AS(opt.step(p, Vector::Zero(2)), ConfigError);
}

TEST_CASE("schedule and step embedding") {
    const DiffusionSchedule s = DiffusionSchedule::linear(10, 1e-4, 0.2);
    CHECK(s.steps == 10);
    CHECK(s.betas.front() == doctest::Approx(1e-4));
    CHECK(s.betas.back() == doctest::Approx(0.2));
    double bar = 1.0;
    for (int i = 0; i < 10; ++i) {
        bar *= 1.0 - s.betas[static_cast<std::size_t>(i)];
        CHECK(s.alpha_bars[static_cast<std::size_t>(i)] == doctest::Approx(bar).epsilon(1e-14));
    }
    CHECK_THROWS_AS(DiffusionSchedule::from_betas({0.1, 1.0}), ConfigError);
    CHECK_THROWS_AS(DiffusionSchedule::linear(0), ConfigError);

    const Vector e1 = step_embedding(1);
    const Vector e2 = step_embedding(2);
    CHECK(e1.size() == kStepEmbedding);
    CHECK(e1.cwiseAbs().maxCoeff() <= 1.0);
    CHECK((e1 - e2).norm() > 0.1);
    CHECK(e1[0] == doctest::Approx(std::sin(1.0)));
    CHECK(e1[1] == doctest::Approx(std::cos(1.0)));
}

TEST_CASE("environment encoding") {
    const EnvEncoding enc = EnvEncoding::defaults();
    const Vector e = enc.encode(fixtures::market_env());
    CHECK(e.size() == kEnvComponents);
    CHECK(e.cwiseAbs().maxCoeff() <= 1.0);
    contract::Environment far = fixtures::market_env();
    far.qos_value = 1e9;
    CHECK(enc.encode(far)[0] == 1.0);
    far.qos_value = 150.0;
    CHECK(enc.encode(far)[0] == doctest::Approx(2.0 * 50.0 / 1900.0 - 1.0));
    CHECK(std::set<std::string>(env_component_names().begin(), env_component_names().end()).size() ==
          static_cast<std::size_t>(kEnvComponents));
}

TEST_CASE("squash stays inside the box") {
    const contract::ContractBox box{{0.0, 1000.0}, {5.0, 20.0}};
    channel::RandomStream rng(8);
    for (int k = 0; k < 100000; ++k) {
        const double scale = std::pow(10.0, 6.0 * rng.uniform() - 2.0);
        const Eigen::Vector2d raw(scale * rng.normal(), scale * rng.normal());
        CHECK_UNARY(box.contains(squash(raw, box)));
    }
    const auto hi = squash(Eigen::Vector2d(1e300, -1e300), box);
    CHECK(hi.c_q == 1000.0);
    CHECK(hi.c_f == 5.0);
    const auto mid = squash(Eigen::Vector2d(0.0, 0.0), box);
    CHECK(mid.c_q == doctest::Approx(500.0));
    CHECK(mid.c_f == doctest::Approx(12.5));
}

TEST_CASE("zero-output denoiser returns the scaled reverse-noise sum") {
    // With ε ≡ 0 the chain is c^0 = c^N/sqrt(ᾱ_N) + Σ_{i≥2} sqrt(β_i) z_i / Π_{j<i} sqrt(α_j).
    const DiffusionSchedule s = DiffusionSchedule::linear(10);
    channel::RandomStream rng(21);
    DenseNet policy = make_policy_net(8);
    policy.initialize(rng, true);
    double var = 1.0 / s.alpha_bars.back();
    for (int i = 2; i <= s.steps; ++i)
        var += s.betas[static_cast<std::size_t>(i - 1)] / s.alpha_bars[static_cast<std::size_t>(i - 2)];

    const Eigen::Index n = 10000;
    const Matrix env = Matrix::Zero(kEnvComponents, n);
    const Matrix c = denoise_batch(policy, s, env, chain_noise(s, n, rng));
    for (int d = 0; d < kActionDim; ++d) {
        const double mean = c.row(d).mean();
        const double sample_var = (c.row(d).array() - mean).square().sum() / (n - 1);
        CHECK(std::abs(mean) < 3.0 * std::sqrt(var / n));
        // Sample variance of a normal has relative sd sqrt(2/(n-1)).
        CHECK(std::abs(sample_var / var - 1.0) < 3.0 * std::sqrt(2.0 / (n - 1)));
    }
}

TEST_CASE("gradient through the denoising chain") {
    channel::RandomStream rng(31);
    const DiffusionSchedule s = DiffusionSchedule::linear(5);
    DenseNet policy = make_policy_net(8);
    policy.initialize(rng);
    const Matrix env = random_matrix(kEnvComponents, 3, rng).cwiseMax(-1.0).cwiseMin(1.0);
    const std::vector<Matrix> noise = chain_noise(s, 3, rng);
    const Matrix u = random_matrix(kActionDim, 3, rng);
    auto loss = [&] { return (denoise_batch(policy, s, env, noise).array() * u.array()).sum(); };

    ChainTape tape;
    denoise_batch(policy, s, env, noise, &tape);
    const Vector grad = backprop_chain(policy, s, tape, u, false);
    CHECK(gradient_mismatch(policy.parameters(), grad, loss, rng) < 1e-4);

    // Truncation keeps only the final step's contribution.
    const Vector last = backprop_chain(policy, s, tape, u, true);
    CHECK(last.allFinite());
    CHECK((last - grad).norm() > 1e-8);
    const DiffusionSchedule one = DiffusionSchedule::linear(1);
    const std::vector<Matrix> noise1 = chain_noise(one, 3, rng);
    ChainTape tape1;
    denoise_batch(policy, one, env, noise1, &tape1);
    CHECK((backprop_chain(policy, one, tape1, u, true) - backprop_chain(policy, one, tape1, u, false)).norm() == 0.0);
}

TEST_CASE("bellman targets use the smaller critic") {
    Vector r(3), q1(3), q2(3);
    r << 1.0, 0.0, -1.0;
    q1 << 2.0, 5.0, -3.0;
    q2 << 4.0, 1.0, -2.0;
    const Vector y = bellman_targets(r, q1, q2, 0.5);
    CHECK(y[0] == 2.0);
    CHECK(y[1] == 0.5);
    CHECK(y[2] == -2.5);
}

TEST_CASE("train step follows the critic and policy loss gradients") {
    channel::RandomStream data(41);
    const std::vector<Record> records = random_records(16, data);
    TrainConfig cfg = tiny_config();
    cfg.policy_lr = 1e-7;
    cfg.critic_lr = 1e-7;
    Trainer t(cfg);
    // The zero output layer would leave the hidden layers without gradient.
    channel::RandomStream jitter(43);
    for (Eigen::Index k = 0; k < t.policy.parameters().size(); ++k) t.policy.parameters()[k] += 0.1 * jitter.normal();
    t.policy_target = t.policy;
    const DenseNet policy0 = t.policy;
    const DenseNet critic0 = t.critic1;
    const Eigen::Index n = 16;
    Matrix env(kEnvComponents, n), act(kActionDim, n);
    Vector rew(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        env.col(k) = records[static_cast<std::size_t>(k)].env;
        act.col(k) = records[static_cast<std::size_t>(k)].action;
        rew[k] = records[static_cast<std::size_t>(k)].reward;
    }
    auto critic_in = [&](const Matrix& raw) {
        Matrix x(critic_input_size(), n);
        x.topRows(kActionDim) = raw.array().tanh().matrix();
        x.bottomRows(kEnvComponents) = env;
        return x;
    };

    // Replay the trainer's draws.
    channel::RandomStream rng(42);
    channel::RandomStream replay = rng;
    const std::vector<Matrix> target_noise = chain_noise(t.schedule(), n, replay);
    const std::vector<Matrix> policy_noise = chain_noise(t.schedule(), n, replay);
    const Matrix next = denoise_batch(t.policy_target, t.schedule(), env, target_noise);
    const Vector y = bellman_targets(rew, t.critic1_target.forward(critic_in(next)).row(0).transpose(),
                                     t.critic2_target.forward(critic_in(next)).row(0).transpose(), cfg.gamma);
    t.train_step(pointers(records), rng);

    // Adam's first step is -lr·sign(g) wherever |g| ≫ its epsilon.
    auto agrees = [](const Vector& before, const Vector& after, double lr, auto loss, Vector& params) {
        int checked = 0;
        int wrong = 0;
        for (Eigen::Index k = 0; k < params.size(); k += 7) {
            const double saved = params[k];
            params[k] = saved + 1e-5;
            const double up = loss();
            params[k] = saved - 1e-5;
            const double down = loss();
            params[k] = saved;
            const double g = (up - down) / 2e-5;
            if (std::abs(g) < 1e-4) continue;
            ++checked;
            const double step = after[k] - before[k];
            if (std::abs(step + lr * (g > 0 ? 1.0 : -1.0)) > 1e-3 * lr) ++wrong;
        }
        return std::pair{checked, wrong};
    };

    DenseNet critic = critic0;
    const Matrix xa = critic_in(act);
    auto critic_loss = [&] { return (critic.forward(xa).row(0).transpose() - y).squaredNorm() / n; };
    const auto [c_checked, c_wrong] =
        agrees(critic0.parameters(), t.critic1.parameters(), cfg.critic_lr, critic_loss, critic.parameters());
    CHECK(c_checked > 50);
    CHECK(c_wrong == 0);

    DenseNet policy = policy0;
    auto policy_loss = [&] {
        const Matrix x = critic_in(denoise_batch(policy, t.schedule(), env, policy_noise));
        const Vector q = t.critic1.forward(x).row(0).transpose().cwiseMin(t.critic2.forward(x).row(0).transpose());
        return -q.mean();
    };
    const auto [p_checked, p_wrong] =
        agrees(policy0.parameters(), t.policy.parameters(), cfg.policy_lr, policy_loss, policy.parameters());
    CHECK(p_checked > 50);
    CHECK(p_wrong == 0);

    // Targets moved by τ toward the online networks.
    const Vector expected = cfg.tau * t.policy.parameters() + (1.0 - cfg.tau) * policy0.parameters();
    CHECK((t.policy_target.parameters() - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("critic loss decreases on a fixed batch") {
    channel::RandomStream data(51);
    const std::vector<Record> records = random_records(64, data);
    TrainConfig cfg = tiny_config();
    cfg.gamma = 0.0;
    cfg.policy_lr = 0.0;
    Trainer t(cfg);
    channel::RandomStream rng(52);
    std::vector<double> losses;
    for (int k = 0; k < 100; ++k) losses.push_back(t.train_step(pointers(records), rng).critic_loss);
    const double head = std::accumulate(losses.begin(), losses.begin() + 10, 0.0);
    const double tail = std::accumulate(losses.end() - 10, losses.end(), 0.0);
    CHECK(tail < 0.5 * head);
}

TEST_CASE("critic converges to the discounted fixed point under a frozen policy") {
    // Actions are drawn from the frozen policy so the next-state actions lie
    // where the critic is fitted; the fixed point is r/(1 - γ) = 0.6.
    TrainConfig cfg = tiny_config();
    cfg.gamma = 0.5;
    cfg.policy_lr = 0.0;
    cfg.critic_lr = 3e-3;
    cfg.tau = 0.1;
    Trainer t(cfg);
    channel::RandomStream data(61);
    const Vector e = random_matrix(kEnvComponents, 1, data).col(0).cwiseMax(-1.0).cwiseMin(1.0);
    const Matrix env = e.replicate(1, 32);
    const Matrix act = denoise_batch(t.policy, t.schedule(), env, chain_noise(t.schedule(), 32, data));
    std::vector<Record> records;
    for (Eigen::Index k = 0; k < 32; ++k) records.push_back({e, act.col(k), 0.3});
    channel::RandomStream rng(62);
    for (int k = 0; k < 2000; ++k) t.train_step(pointers(records), rng);
    const Vector q = t.critic_value(env, act);
    CHECK(std::abs(q.mean() / 0.6 - 1.0) < 0.01);
    CHECK((q.array() - 0.6).abs().maxCoeff() < 0.02);
}

TEST_CASE("replay buffer") {
    ReplayBuffer buf(3);
    CHECK_THROWS_AS(ReplayBuffer(0), ConfigError);
    for (int k = 0; k < 5; ++k) buf.push({Vector::Zero(kEnvComponents), Eigen::Vector2d::Zero(), double(k)});
    CHECK(buf.size() == 3);
    CHECK(buf.at(0).reward == 2.0);
    CHECK(buf.at(2).reward == 4.0);
    CHECK_THROWS_AS(buf.at(3), ConfigError);

    ReplayBuffer big(100);
    for (int k = 0; k < 100; ++k) big.push({Vector::Zero(kEnvComponents), Eigen::Vector2d::Zero(), double(k)});
    channel::RandomStream rng(71);
    std::vector<int> hits(100, 0);
    for (int trial = 0; trial < 2000; ++trial) {
        const auto batch = big.sample(10, rng);
        std::set<const Record*> unique(batch.begin(), batch.end());
        CHECK(unique.size() == 10u);
        for (const Record* r : batch) ++hits[static_cast<std::size_t>(r->reward)];
    }
    // Each record is drawn with probability 1/10 per batch: 200 ± 13.4 expected.
    for (int h : hits) CHECK(std::abs(h - 200) < 5.0 * std::sqrt(2000 * 0.1 * 0.9));
    CHECK(big.sample(100, rng).size() == 100u);
    CHECK_THROWS_AS(big.sample(101, rng), ConfigError);
}

TEST_CASE("training is deterministic for a seed") {
    const EnvSource source({std::shared_ptr<const contract::QoSTable>(&small_market_table(), [](auto*) {})});
    TrainConfig cfg = tiny_config();
    cfg.seed = 9;
    const TrainResult a = train(source, cfg);
    const TrainResult b = train(source, cfg);
    CHECK(a.episode_reward == b.episode_reward);
    CHECK(a.critic_loss == b.critic_loss);
    CHECK(a.trainer->policy.parameters() == b.trainer->policy.parameters());
    CHECK(a.episode_reward.size() == 40u);
    CHECK(a.critic_loss.size() == 40u - 15u);
    cfg.seed = 10;
    const TrainResult c = train(source, cfg);
    CHECK(c.trainer->policy.parameters() != a.trainer->policy.parameters());
}

TEST_CASE("training config validation") {
    TrainConfig c;
    c.validate();
    c.tau = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = TrainConfig{};
    c.buffer_capacity = 10;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = TrainConfig{};
    c.gamma = 1.5;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK_THROWS_AS(EnvSource({}), ConfigError);
}

TEST_CASE("inference and checkpoint round trip") {
    const contract::QoSTable& table = small_market_table();
    TrainConfig cfg = tiny_config();
    cfg.seed = 4;
    cfg.last_step_only = true;
    Trainer t(cfg);
    const Inference a = infer(t.policy, t.schedule(), table, cfg.encoding, 123);
    CHECK(contract::default_box(table.environment()).contains(a.contract));
    const Inference again = infer(t.policy, t.schedule(), table, cfg.encoding, 123);
    CHECK(a.contract.c_q == again.contract.c_q);

    const std::string path = (std::filesystem::temp_directory_path() / "duplex_checkpoint_test.json").string();
    save_checkpoint(path, {cfg, t.schedule(), t.policy});
    const Checkpoint cp = load_checkpoint(path);
    CHECK(cp.policy.parameters() == t.policy.parameters());
    CHECK(cp.policy.sizes() == t.policy.sizes());
    CHECK(cp.schedule.betas == t.schedule().betas);
    CHECK(cp.config.hidden == 16);
    CHECK(cp.config.last_step_only);
    CHECK(cp.config.seed == 4u);
    const Inference b = infer(cp.policy, cp.schedule, table, cp.config.encoding, 123);
    CHECK(a.contract.c_q == b.contract.c_q);
    CHECK(a.contract.c_f == b.contract.c_f);
    CHECK(mean_policy_reward(cp.policy, cp.schedule, table, cp.config.encoding, 50, 1) ==
          mean_policy_reward(t.policy, t.schedule(), table, cfg.encoding, 50, 1));

    {
        std::FILE* f = std::fopen(path.c_str(), "w");
        std::fputs("{\"format\": \"something else\"}", f);
        std::fclose(f);
    }
    CHECK_THROWS_AS(load_checkpoint(path), ConfigError);
    {
        std::FILE* f = std::fopen(path.c_str(), "w");
        std::fputs("{not json", f);
        std::fclose(f);
    }
    CHECK_THROWS_AS(load_checkpoint(path), ConfigError);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_checkpoint(path), ConfigError);
}
