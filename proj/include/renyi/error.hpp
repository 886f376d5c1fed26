// error.hpp
// Exception hierarchy shared by every module.

#pragma once

#include <stdexcept>
#include <string>

namespace renyi {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Marginal parameters outside their domain (sigma <= 0, b <= a, ...).
class InvalidMarginal : public Error {
public:
    using Error::Error;
};

// Operation not defined for this family (e.g. copula with a Levy marginal).
class UnsupportedMarginal : public Error {
public:
    using Error::Error;
};

class QuadratureError : public Error {
public:
    QuadratureError(const std::string& what, double estimate)
        : Error(what), estimate_(estimate) {}

    // Best panel estimate available when recursion gave up.
    double estimate() const noexcept { return estimate_; }

private:
    double estimate_;
};

class DivergenceError : public Error {
public:
    using Error::Error;
};

class DegenerateSample : public Error {
public:
    using Error::Error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

class InfeasibleError : public Error {
public:
    using Error::Error;
};

class ObjectiveError : public Error {
public:
    using Error::Error;
};

// Malformed external input (CSV, config, mismatched series).
class InputError : public Error {
public:
    using Error::Error;
};

} // namespace renyi
