#pragma once

#include <stdexcept>
#include <string>

namespace ballistic {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an input value was violated.
class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& message)
        : Error(field + ": " + message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// The requested run would need more memory than the configured cap allows.
class ResourceError : public Error {
public:
    using Error::Error;
};

/// An explicit step was requested with a Courant number outside the stable range.
class StabilityError : public Error {
public:
    explicit StabilityError(double nu, double limit)
        : Error("Courant number " + std::to_string(nu) + " outside [0, " +
                std::to_string(limit) + "]; split the step"),
          nu_(nu) {}

    double nu() const noexcept { return nu_; }

private:
    double nu_;
};

/// Density reached the domain boundary.
class DomainTooSmallError : public Error {
public:
    DomainTooSmallError(double time, const std::string& message)
        : Error(message), time_(time) {}

    double time() const noexcept { return time_; }

private:
    double time_;
};

/// Malformed or inconsistent configuration file.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// File system or table-format failure.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace ballistic
