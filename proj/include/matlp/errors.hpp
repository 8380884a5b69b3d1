#pragma once

#include <stdexcept>
#include <string>

namespace matlp {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input files (bad JSON, bad JSONL line). Messages carry
// "path:line:" prefixes where a line is known.
class ParseError : public Error {
public:
    using Error::Error;
};

// Structurally valid input that violates a data invariant
// (duplicate ids, out-of-range spans, inconsistent offsets...).
class ValidationError : public Error {
public:
    using Error::Error;
};

// Bad run configuration: missing credentials, unknown scheme names,
// contradictory settings. Raised before any backend traffic.
class ConfigError : public Error {
public:
    using Error::Error;
};

// A backend request failed after retries were exhausted.
class RequestError : public Error {
public:
    explicit RequestError(const std::string& msg, int last_status = 0)
        : Error(msg), last_status_(last_status) {}
    int last_status() const { return last_status_; }

private:
    int last_status_;
};

// The backend answered but the body was not what the protocol promises.
class ProtocolError : public Error {
public:
    using Error::Error;
};

}  // namespace matlp
