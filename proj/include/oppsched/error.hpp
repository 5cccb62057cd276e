#pragma once

#include <stdexcept>
#include <string>

namespace oppsched {

/// Base class for all domain errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Problem with a plan file or plan structure. `line` is 0 when the error
/// is not tied to a specific line of input.
class PlanError : public Error {
public:
    explicit PlanError(const std::string& what, int line = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

/// A policy was asked for a decision it cannot make: nothing is installable
/// and nothing is visible to buffer. Cannot occur under the stochastic bin
/// model; signaled for scripted replays and hand-built states.
class DeadlockError : public Error {
public:
    using Error::Error;
};

/// Scripted replay precondition violation: an observation overlaps parts
/// already out of the bin, or the script ran out before the episode ended.
class ScriptError : public Error {
public:
    using Error::Error;
};

}  // namespace oppsched
