#pragma once

#include <stdexcept>
#include <string>

namespace entstop {

// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Invalid market / scheme / experiment configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Fewer regression samples than basis functions.
class InsufficientDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Object used before it was put in a valid state (e.g. predicting from an unfitted step).
class StateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Numerical failure that cannot be recovered (non-finite values, breakdown of a solve).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    IoError(const std::string& path, const std::string& what)
        : std::runtime_error(what + ": " + path), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace entstop
