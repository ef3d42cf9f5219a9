#pragma once

#include <stdexcept>
#include <string>

namespace duplex {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of a function (e.g. a gamma pole).
class DomainError : public Error {
public:
    using Error::Error;
};

// Invalid parameters, configuration files or option combinations.
class ConfigError : public Error {
public:
    using Error::Error;
};

// A numerical routine could not reach its accuracy target. The best
// estimate it did reach is carried along so callers can decide.
class AccuracyError : public Error {
public:
    AccuracyError(const std::string& what, double estimate, double achieved_rel_error)
        : Error(what), estimate_(estimate), achieved_(achieved_rel_error) {}

    double estimate() const noexcept { return estimate_; }
    double achieved_rel_error() const noexcept { return achieved_; }

private:
    double estimate_;
    double achieved_;
};

// Non-finite values appeared where finite ones are required.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace duplex
