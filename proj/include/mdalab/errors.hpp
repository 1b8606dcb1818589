#pragma once

#include <stdexcept>
#include <string>

namespace mdalab {

/// Argument outside the mathematical domain of an operation (q = 0, non-prime p, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A computation would exceed a configured enumeration or interval budget.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A ratio or bound whose denominator vanished.
class UndefinedRatio : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An infinite summand reached a partial sum.
class OverflowError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input data violating a structural invariant (weights not summing to one, ...).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Adaptive integration did not reach the requested tolerance.
/// Carries the best bracket [low, high] obtained before giving up.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double low, double high)
        : std::runtime_error(what), low_(low), high_(high) {}
    double low() const noexcept { return low_; }
    double high() const noexcept { return high_; }

private:
    double low_;
    double high_;
};

/// Malformed configuration; `field()` names the offending JSON path.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(field) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace mdalab
