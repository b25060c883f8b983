#pragma once

#include <stdexcept>
#include <string>

namespace nlf {

/// Raised when an operation's precondition is violated. The message names
/// the violated condition; callers (the CLI in particular) surface it as-is.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A kernel or parameter tuple failed a hypothesis gate. Carries the
/// rendered certificate so the caller can show what was measured.
class HypothesisError : public Error {
public:
    HypothesisError(const std::string& what, std::string certificate)
        : Error(what), certificate_(std::move(certificate)) {}

    const std::string& certificate() const noexcept { return certificate_; }

private:
    std::string certificate_;
};

}  // namespace nlf
