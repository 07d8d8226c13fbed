#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rtt {

/// Base class for every failure raised by the library. The CLI maps plain
/// `Error` to exit code 1 and `InputError` (malformed files, IO) to exit 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or unreadable input.
class InputError : public Error {
public:
    using Error::Error;
};

class ParseError : public InputError {
public:
    ParseError(std::size_t line, const std::string& what);

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// An object violates one of its structural invariants.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Elution order (strictly increasing retention times) is violated.
class OrderViolationError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// A standard could not be bound to exactly one peak.
class AmbiguousStandardError : public Error {
public:
    using Error::Error;
};

class EmptyLibraryError : public Error {
public:
    using Error::Error;
};

/// An assignment has no paired compounds left to average over.
class UnscorableError : public Error {
public:
    using Error::Error;
};

}  // namespace rtt
