#pragma once

#include <stdexcept>
#include <string>

namespace stakeopt {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the domain of an operation (time outside [0,T], x < 0, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Non-finite values or a failed refinement inside a numerical routine.
class NumericError : public Error {
public:
    NumericError(const std::string& what, double time)
        : Error(what + " (t = " + std::to_string(time) + ")"), time_(time) {}
    explicit NumericError(const std::string& what) : Error(what) {}

    double time() const { return time_; }

private:
    double time_ = 0.0;
};

/// Invalid configuration: malformed input files, inconsistent parameters.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Base of every "refuse to claim optimality" outcome. The CLI maps these to exit code 2.
class Refusal : public Error {
public:
    using Error::Error;
    virtual const char* kind() const noexcept = 0;
};

/// A sufficient condition for optimality fails; carries the first failing time.
class ConditionUnverified : public Refusal {
public:
    ConditionUnverified(const std::string& what, double failing_time)
        : Refusal(what), failing_time_(failing_time) {}
    double failing_time() const { return failing_time_; }
    const char* kind() const noexcept override { return "ConditionUnverified"; }

private:
    double failing_time_;
};

class AssumptionViolated : public Refusal {
public:
    using Refusal::Refusal;
    const char* kind() const noexcept override { return "AssumptionViolated"; }
};

/// The state may reach 0 or N(t) before the horizon, outside the closed-form regime.
class EarlyExitPossible : public Refusal {
public:
    using Refusal::Refusal;
    const char* kind() const noexcept override { return "EarlyExitPossible"; }
};

class Unclassified : public Refusal {
public:
    using Refusal::Refusal;
    const char* kind() const noexcept override { return "Unclassified"; }
};

}  // namespace stakeopt
