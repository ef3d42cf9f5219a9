#include "duplex/diffusion/network.hpp"

#include <cmath>
#include <memory>
#include <string>

#include "duplex/error.hpp"

namespace duplex::diffusion {

DenseNet::DenseNet(std::vector<int> sizes) : sizes_(std::move(sizes)) {
    if (sizes_.size() < 2) throw ConfigError("network: need at least an input and an output layer");
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        if (sizes_[l] < 1 || sizes_[l + 1] < 1) throw ConfigError("network: layer sizes must be positive");
        offsets_.push_back(total);
        total += static_cast<std::size_t>(sizes_[l + 1]) * (sizes_[l] + 1);
    }
    params_ = Vector::Zero(static_cast<Eigen::Index>(total));
}

void DenseNet::initialize(channel::RandomStream& rng, bool zero_output_layer) {
    const std::size_t layers = sizes_.size() - 1;
    for (std::size_t l = 0; l < layers; ++l) {
        const int in = sizes_[l];
        const int out = sizes_[l + 1];
        double* w = params_.data() + offset(l);
        const bool zero = zero_output_layer && l + 1 == layers;
        const double limit = std::sqrt(6.0 / (in + out));
        for (int k = 0; k < in * out; ++k) w[k] = zero ? 0.0 : limit * (2.0 * rng.uniform() - 1.0);
        for (int k = 0; k < out; ++k) w[in * out + k] = 0.0;
    }
}

Matrix DenseNet::forward(const Matrix& input, Tape* tape) const {
    if (input.rows() != input_size())
        throw ConfigError("network: expected input dimension " + std::to_string(input_size()) + ", got " +
                          std::to_string(input.rows()));
    const std::size_t layers = sizes_.size() - 1;
    if (tape) {
        tape->activations.resize(layers + 1);
        tape->activations[0] = input;
    }
    Matrix x = input;
    for (std::size_t l = 0; l < layers; ++l) {
        const int in = sizes_[l];
        const int out = sizes_[l + 1];
        Eigen::Map<const Matrix> w(params_.data() + offset(l), out, in);
        Eigen::Map<const Vector> b(params_.data() + offset(l) + in * out, out);
        Matrix z = w * x;
        z.colwise() += b;
        if (l + 1 < layers) z = z.array().tanh().matrix();
        x = std::move(z);
        if (tape) tape->activations[l + 1] = x;
    }
    return x;
}

Matrix DenseNet::backward(const Tape& tape, const Matrix& upstream, Vector& grad) const {
    const std::size_t layers = sizes_.size() - 1;
    if (grad.size() != params_.size()) grad = Vector::Zero(params_.size());
    Matrix delta = upstream;
    for (std::size_t l = layers; l-- > 0;) {
        const int in = sizes_[l];
        const int out = sizes_[l + 1];
        if (l + 1 < layers) delta.array() *= 1.0 - tape.activations[l + 1].array().square();
        Eigen::Map<const Matrix> w(params_.data() + offset(l), out, in);
        Eigen::Map<Matrix> gw(grad.data() + offset(l), out, in);
        Eigen::Map<Vector> gb(grad.data() + offset(l) + in * out, out);
        gw.noalias() += delta * tape.activations[l].transpose();
        gb += delta.rowwise().sum();
        delta = w.transpose() * delta;
    }
    return delta;
}

NetEval net_eval(const DenseNet& net, const Matrix& input) {
    auto tape = std::make_shared<DenseNet::Tape>();
    NetEval e;
    e.output = net.forward(input, tape.get());
    e.gradient = [&net, tape](const Matrix& upstream) {
        Vector g = Vector::Zero(static_cast<Eigen::Index>(net.parameter_count()));
        net.backward(*tape, upstream, g);
        return g;
    };
    return e;
}

void soft_update(DenseNet& target, const DenseNet& source, double tau) {
    if (target.parameter_count() != source.parameter_count())
        throw ConfigError("soft update: networks differ in shape");
    if (tau == 1.0) {
        target.parameters() = source.parameters();
        return;
    }
    target.parameters() = tau * source.parameters() + (1.0 - tau) * target.parameters();
}

Adam::Adam(std::size_t size, double learning_rate, double beta1, double beta2, double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {
    if (!(learning_rate >= 0.0)) throw ConfigError("Adam: learning rate must be non-negative");
    m_ = Vector::Zero(static_cast<Eigen::Index>(size));
    v_ = Vector::Zero(static_cast<Eigen::Index>(size));
}

void Adam::step(Vector& params, const Vector& grad) {
    if (grad.size() != m_.size() || params.size() != m_.size()) throw ConfigError("Adam: size mismatch");
    ++t_;
    m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
    v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    params.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

}  // namespace duplex::diffusion
