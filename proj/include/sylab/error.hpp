#pragma once

#include <stdexcept>
#include <string>

namespace sylab {

/// Parameter or configuration rejected before any numerics run.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical stage failed (non-convergence, singular system, ball escape).
class NumericalError : public std::runtime_error {
public:
    NumericalError(std::string stage, const std::string& what)
        : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

/// Linear solve hit a (near-)singular pivot or an excluded weight.
class SingularSystemError : public NumericalError {
public:
    SingularSystemError(int mode, double condition_estimate, const std::string& what)
        : NumericalError("mode_solver", what), mode_(mode), condition_(condition_estimate) {}

    int mode() const noexcept { return mode_; }
    double condition_estimate() const noexcept { return condition_; }

private:
    int mode_;
    double condition_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace sylab
