#ifndef CHEMOSTAT_ERRORS_HPP
#define CHEMOSTAT_ERRORS_HPP

#include <limits>
#include <stdexcept>
#include <string>

namespace chemostat {

/// Invalid model parameters or arguments outside an operation's domain.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed (step-size underflow, non-finite state,
/// solver non-convergence). Carries the simulation time of the failure
/// when one is meaningful, NaN otherwise.
class NumericalFailure : public std::runtime_error {
public:
    explicit NumericalFailure(const std::string& what, double time = std::numeric_limits<double>::quiet_NaN())
        : std::runtime_error(what), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

/// Configuration text is malformed or violates a model invariant.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace chemostat

#endif
