#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "duplex/channel/random.hpp"

namespace duplex::diffusion {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Fully connected network, tanh on hidden layers, linear output.  Samples
// are columns.  Parameters live in one flat vector, layer by layer, each
// layer as its column-major weight matrix followed by its bias.
class DenseNet {
public:
    DenseNet() = default;
    explicit DenseNet(std::vector<int> sizes);

    const std::vector<int>& sizes() const { return sizes_; }
    int input_size() const { return sizes_.front(); }
    int output_size() const { return sizes_.back(); }
    std::size_t parameter_count() const { return static_cast<std::size_t>(params_.size()); }

    Vector& parameters() { return params_; }
    const Vector& parameters() const { return params_; }

    // Glorot-uniform weights, zero biases; optionally a zero output layer.
    void initialize(channel::RandomStream& rng, bool zero_output_layer = false);

    // Activations of every layer, input first; filled by forward().
    struct Tape {
        std::vector<Matrix> activations;
    };

    // Throws ConfigError on an input dimension mismatch.
    Matrix forward(const Matrix& input, Tape* tape = nullptr) const;

    // Adds the parameter gradient of sum(upstream ⊙ output) to `grad` and
    // returns the gradient with respect to the input.
    Matrix backward(const Tape& tape, const Matrix& upstream, Vector& grad) const;

    bool finite() const { return params_.allFinite(); }

private:
    std::size_t offset(std::size_t layer) const { return offsets_[layer]; }

    std::vector<int> sizes_;
    std::vector<std::size_t> offsets_;
    Vector params_;
};

struct NetEval {
    Matrix output;
    // Parameter gradient of sum(upstream ⊙ output).
    std::function<Vector(const Matrix& upstream)> gradient;
};

NetEval net_eval(const DenseNet& net, const Matrix& input);

// target ← τ·source + (1 - τ)·target.
void soft_update(DenseNet& target, const DenseNet& source, double tau);

class Adam {
public:
    Adam() = default;
    Adam(std::size_t size, double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8);

    void step(Vector& params, const Vector& grad);
    double learning_rate() const { return lr_; }
    long steps() const { return t_; }

private:
    double lr_ = 1e-3;
    double beta1_ = 0.9;
    double beta2_ = 0.999;
    double eps_ = 1e-8;
    long t_ = 0;
    Vector m_;
    Vector v_;
};

}  // namespace duplex::diffusion
