#pragma once

#include <stdexcept>
#include <string>

namespace wkbgreen {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent configuration (unknown kind, bad polynomial, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Inputs outside an operation's precondition.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A characteristic left every finite bound before the final time.
class BlowUpError : public Error {
public:
    BlowUpError(const std::string& what, double time) : Error(what), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

/// Iterative solver failure; carries the last iterate for diagnostics.
class SolverError : public Error {
public:
    SolverError(const std::string& what, double last_a = 0.0, double last_b = 0.0)
        : Error(what), last_a_(last_a), last_b_(last_b) {}
    double last_first() const noexcept { return last_a_; }
    double last_second() const noexcept { return last_b_; }

private:
    double last_a_;
    double last_b_;
};

/// Solution sits on (or a search crossed) a singular fiber of the projection.
class FoldError : public Error {
public:
    using Error::Error;
};

/// Source point at the degenerate origin: the kernel is a delta, not a density.
class DeltaRegimeError : public Error {
public:
    using Error::Error;
};

}  // namespace wkbgreen
