#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace caselab {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad option, unknown name, or a request that cannot be satisfied as configured.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Filesystem failure: a missing or unreadable/unwritable file.
class IoError : public Error {
public:
    using Error::Error;
};

/// A record that cannot be parsed. `line` is 1-based, 0 when not line-oriented.
class FormatError : public Error {
public:
    FormatError(const std::string& what, std::string file = {}, std::size_t line = 0)
        : Error(what), file_(std::move(file)), line_(line) {}

    const std::string& file() const noexcept { return file_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string file_;
    std::size_t line_;
};

/// Cross-record invariant violation. Carries the offending identifiers.
class ValidationError : public Error {
public:
    ValidationError(const std::string& what, std::vector<std::string> ids)
        : Error(what), ids_(std::move(ids)) {}

    const std::vector<std::string>& ids() const noexcept { return ids_; }

private:
    std::vector<std::string> ids_;
};

/// A remote service (the chat-completions endpoint) failed after all retries.
class UpstreamError : public Error {
public:
    using Error::Error;
};

} // namespace caselab
