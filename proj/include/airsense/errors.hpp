#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace airsense {

// Root of every error the library raises. Callers that only need a message
// can catch this; the CLI and service map subclasses onto exit/status codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Caller passed something that violates a precondition.
class ArgumentError : public Error {
public:
    using Error::Error;
};

// Input text does not follow the expected file layout (bad header etc).
class FormatError : public Error {
public:
    using Error::Error;
};

// A single record failed validation. Carries the 1-based line number and
// the offending field so parse reports can point at the exact cell.
class ValidationError : public Error {
public:
    ValidationError(std::size_t line, std::string field, const std::string& what)
        : Error(what_with_line(line, field, what)), line_(line), field_(std::move(field)) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    static std::string what_with_line(std::size_t line, const std::string& field,
                                      const std::string& what) {
        std::string out;
        if (line > 0) {
            out += "line " + std::to_string(line) + ": ";
        }
        out += "field '" + field + "': " + what;
        return out;
    }

    std::size_t line_;
    std::string field_;
};

// Linear algebra failed (singular system, rank deficiency, non-finite loss).
class NumericError : public Error {
public:
    using Error::Error;
};

// Dataset cross-references do not resolve.
class IntegrityError : public Error {
public:
    IntegrityError(const std::string& what, std::vector<std::string> ids)
        : Error(what), ids_(std::move(ids)) {}
    explicit IntegrityError(const std::string& what) : Error(what) {}

    const std::vector<std::string>& offending_ids() const noexcept { return ids_; }

private:
    std::vector<std::string> ids_;
};

class LoadError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

class CorruptionError : public Error {
public:
    using Error::Error;
};

class VersioningError : public Error {
public:
    using Error::Error;
};

// Federated wire messages that cannot be combined.
class ProtocolError : public Error {
public:
    using Error::Error;
};

// Operation is valid but the current state does not allow it (HTTP 409).
class PreconditionError : public Error {
public:
    using Error::Error;
};

}  // namespace airsense
