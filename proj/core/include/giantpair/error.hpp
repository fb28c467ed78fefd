#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace giantpair {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidGridError : public Error {
public:
    using Error::Error;
};

class OverlappingBandError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class PoleError : public Error {
public:
    using Error::Error;
};

class ResolutionError : public Error {
public:
    using Error::Error;
};

class IntegratorFailure : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Raised when a propagation leaves the unit sphere by more than the plan allows.
class NormDriftError : public Error {
public:
    NormDriftError(std::size_t step, double time, double drift);

    std::size_t step() const noexcept { return step_; }
    double time() const noexcept { return time_; }
    double drift() const noexcept { return drift_; }

private:
    std::size_t step_;
    double time_;
    double drift_;
};

}  // namespace giantpair
