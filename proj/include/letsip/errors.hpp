#pragma once

#include <stdexcept>
#include <string>

namespace letsip {

/// Malformed input file. Carries the 1-based line number when known.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_ = 0;
};

/// Inputs that disagree with each other, e.g. a label file of the wrong length.
class ConsistencyError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Argument outside the domain of an operation (unknown item, empty pattern space, ...).
class DomainError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Operation requires state the object does not have (e.g. labels).
class StateError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A caller broke a documented precondition.
class ContractError : public std::logic_error {
    using std::logic_error::logic_error;
};

/// Invalid session/sampler configuration.
class ConfigError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Feedback that does not match the pending query.
class ValidationError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The sampler could not find an acceptable cell within its retry budget.
class SamplerExhausted : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace letsip
