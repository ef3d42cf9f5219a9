#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "duplex/channel/random.hpp"

namespace duplex::diffusion {

struct Record {
    Eigen::VectorXd env;     // encoded environment
    Eigen::Vector2d action;  // raw denoiser output, before squashing
    double reward = 0.0;
};

// FIFO ring of records.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(Record r);
    std::size_t size() const { return data_.size(); }
    std::size_t capacity() const { return capacity_; }
    // i-th oldest record.
    const Record& at(std::size_t i) const;

    // n distinct records, uniformly; throws ConfigError if n > size().
    std::vector<const Record*> sample(std::size_t n, channel::RandomStream& rng) const;

private:
    std::size_t capacity_;
    std::size_t head_ = 0;  // oldest record once full
    std::vector<Record> data_;
};

}  // namespace duplex::diffusion
