#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hevlab {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad input data or configuration; the CLI maps these to exit code 2.
class ValidationError : public Error {
public:
    using Error::Error;
};

class ParseError : public ValidationError {
public:
    ParseError(const std::string& what, std::size_t line)
        : ValidationError(what + " (line " + std::to_string(line) + ")"), line_(line) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

/// Battery power request with a negative current discriminant, or an unreachable DP target.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

/// SOC window or actuator envelope violated.
class ConstraintError : public Error {
public:
    using Error::Error;
};

class SaturationError : public Error {
public:
    using Error::Error;
};

/// Operation called in the wrong lifecycle state (e.g. backprop without a forward cache).
class StateError : public Error {
public:
    using Error::Error;
};

/// Training diverged (NaN loss) or was aborted.
class TrainingError : public Error {
public:
    using Error::Error;
};

} // namespace hevlab
