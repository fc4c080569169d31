#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace prefevo {

/// Input that violates a documented precondition (bad config, out-of-range
/// rating, mismatched lengths). Carries one entry per problem found.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& message)
        : std::invalid_argument(message), issues_{message} {}
    explicit ValidationError(std::vector<std::string> issues)
        : std::invalid_argument(join(issues)), issues_(std::move(issues)) {}

    const std::vector<std::string>& issues() const noexcept { return issues_; }

private:
    static std::string join(const std::vector<std::string>& issues) {
        std::string out;
        for (const auto& issue : issues) {
            if (!out.empty()) out += "; ";
            out += issue;
        }
        return out;
    }

    std::vector<std::string> issues_;
};

/// A command that is not valid in the current session state (stale trial id,
/// submission after completion).
class StateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A persisted payload (snapshot, log, WAV) that cannot be decoded.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace prefevo
