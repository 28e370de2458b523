#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace priq {

// Error categories map onto the CLI exit codes: validation -> 2,
// numeric -> 3, resource -> 4.  Each error carries a short stable code
// (e.g. "NonErgodic") so callers can branch without parsing messages.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(code + ": " + what), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

// Bad inputs: rejected before any real work starts.
class ValidationError : public Error {
public:
    using Error::Error;
};

// The computation itself failed: non-convergence, pole proximity,
// non-finite samples, broken internal cross-checks.
class NumericError : public Error {
public:
    using Error::Error;
};

// A requested computation would exceed a configured budget.
class ResourceError : public Error {
public:
    using Error::Error;
};

}  // namespace priq
