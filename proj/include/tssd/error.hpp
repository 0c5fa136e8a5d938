#pragma once

#include <stdexcept>
#include <string>

namespace tssd {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file. Carries the 1-based line number when known (0 otherwise).
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// A configuration value violates its invariant (rate outside [0,1], N < K, ...).
class InvalidSpec : public Error {
public:
    using Error::Error;
};

/// Caller broke a documented precondition (label out of range, length mismatch).
class ContractViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Class center requested for an empty cluster.
class NoCenter : public Error {
public:
    using Error::Error;
};

/// Too few or constant values to fit a two-component mixture.
class DegenerateFit : public Error {
public:
    using Error::Error;
};

/// The certain set lacks positives or negatives, so the purifier cannot be trained.
class MetaStarved : public Error {
public:
    using Error::Error;
};

/// A loss or parameter became non-finite during optimization.
class NumericalFailure : public Error {
public:
    using Error::Error;
};

/// Two inputs that must describe the same id space do not.
class IdMismatch : public Error {
public:
    using Error::Error;
};

}  // namespace tssd
