#pragma once

#include <stdexcept>
#include <string>

namespace aci {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad scenario/experiment configuration or an SLO naming an unknown variable.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Argument outside the valid domain of an operation (e.g. batch size 31).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Not enough data points to fit a model.
class InsufficientData : public Error {
public:
    using Error::Error;
};

/// Linear system is singular (e.g. every x identical).
class DegenerateInputs : public Error {
public:
    using Error::Error;
};

/// Observation does not match the batch size the agent commanded.
class ProtocolError : public Error {
public:
    using Error::Error;
};

/// Malformed CSV/config input; carries the 1-based line number.
class ParseError : public ConfigError {
public:
    ParseError(std::size_t line, const std::string& what)
        : ConfigError("line " + std::to_string(line) + ": " + what), line_(line) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Replay dataset has no remaining batch for the commanded size.
class ReplayExhausted : public Error {
public:
    explicit ReplayExhausted(int batch_size)
        : Error("replay exhausted for bs=" + std::to_string(batch_size)), batch_size_(batch_size) {}

    [[nodiscard]] int batch_size() const noexcept { return batch_size_; }

private:
    int batch_size_;
};

}  // namespace aci
