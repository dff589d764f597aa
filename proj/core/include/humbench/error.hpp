#pragma once

#include <stdexcept>
#include <string>

namespace humbench {

// Base of everything the library throws on a contract violation.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input failed validation (bad parameters, malformed files, broken invariants).
class ValidationError : public Error {
public:
    using Error::Error;
};

// Stored data disagrees with a recomputation (e.g. coarse class column).
class IntegrityError : public Error {
public:
    using Error::Error;
};

// A model response could not be mapped onto a verdict.
class UnparseableError : public Error {
public:
    UnparseableError(const std::string& what, std::string raw_text)
        : Error(what), raw_text_(std::move(raw_text)) {}

    const std::string& raw_text() const noexcept { return raw_text_; }

private:
    std::string raw_text_;
};

// Replay mode lookup failed.
class CacheMiss : public Error {
public:
    explicit CacheMiss(std::string digest)
        : Error("cache miss for request digest " + digest), digest_(std::move(digest)) {}

    const std::string& digest() const noexcept { return digest_; }

private:
    std::string digest_;
};

// Network or provider failure after retries were exhausted.
class TransportError : public Error {
public:
    TransportError(const std::string& what, int status = 0) : Error(what), status_(status) {}

    int status() const noexcept { return status_; }

private:
    int status_;
};

class NotFound : public Error {
public:
    using Error::Error;
};

// Request is well-formed but not allowed in the current state.
class StateError : public Error {
public:
    using Error::Error;
};

}  // namespace humbench
