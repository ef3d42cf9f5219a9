#pragma once

#include <cstdint>
#include <random>

namespace duplex::channel {

// One reproducible random stream.  Streams with the same seed and
// different indices are statistically independent.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0);

    double uniform();                // (0, 1), 53-bit resolution
    double normal();                 // standard normal
    double gamma(double shape);      // unit-scale gamma
    std::uint64_t below(std::uint64_t n);  // uniform integer in [0, n)

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace duplex::channel
