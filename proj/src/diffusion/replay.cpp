#include "duplex/diffusion/replay.hpp"

#include <algorithm>

#include "duplex/error.hpp"

namespace duplex::diffusion {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ConfigError("replay buffer: capacity must be positive");
    data_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::push(Record r) {
    if (data_.size() < capacity_) {
        data_.push_back(std::move(r));
        return;
    }
    data_[head_] = std::move(r);
    head_ = (head_ + 1) % capacity_;
}

const Record& ReplayBuffer::at(std::size_t i) const {
    if (i >= data_.size()) throw ConfigError("replay buffer: index out of range");
    return data_[(head_ + i) % data_.size()];
}

std::vector<const Record*> ReplayBuffer::sample(std::size_t n, channel::RandomStream& rng) const {
    if (n > data_.size()) throw ConfigError("replay buffer: batch larger than the buffer");
    // Floyd's algorithm: n distinct indices in O(n) draws.
    std::vector<std::size_t> picked;
    picked.reserve(n);
    const std::size_t size = data_.size();
    for (std::size_t j = size - n; j < size; ++j) {
        const std::size_t t = rng.below(j + 1);
        const bool seen = std::find(picked.begin(), picked.end(), t) != picked.end();
        picked.push_back(seen ? j : t);
    }
    std::vector<const Record*> out;
    out.reserve(n);
    for (std::size_t i : picked) out.push_back(&data_[i]);
    return out;
}

}  // namespace duplex::diffusion
