#pragma once

#include <stdexcept>
#include <string>

namespace lsr {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// The potential is not bistable for the given thresholds.
class DegenerateWells : public Error {
public:
    using Error::Error;
};

class InvalidAsymmetry : public Error {
public:
    using Error::Error;
};

class FitFailed : public Error {
public:
    using Error::Error;
};

/// |x| left the admissible range during integration, usually because dt is too large.
class NumericalBlowup : public Error {
public:
    using Error::Error;
};

class EmptySegment : public Error {
public:
    using Error::Error;
};

/// Neither noise level confines the process around the requested well.
class NoMetastableState : public Error {
public:
    using Error::Error;
};

class SingularDensity : public Error {
public:
    using Error::Error;
};

class DivergentAction : public Error {
public:
    DivergentAction(const std::string& what, double location)
        : Error(what), location_(location) {}
    double location() const noexcept { return location_; }

private:
    double location_;
};

/// No Monte-Carlo path escaped; upper_bound() is the rate implied by one escape.
class AllCensored : public Error {
public:
    AllCensored(const std::string& what, double upper_bound)
        : Error(what), upper_bound_(upper_bound) {}
    double upper_bound() const noexcept { return upper_bound_; }

private:
    double upper_bound_;
};

class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& reason)
        : Error(key.empty() ? reason : key + ": " + reason), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

}  // namespace lsr
