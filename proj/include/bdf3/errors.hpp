#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bdf3 {

// Precondition violations throw std::invalid_argument / std::out_of_range.
// Everything below signals a numerical failure the caller may want to
// distinguish from bad input.

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Newton iteration hit its iteration cap without meeting the residual tolerance.
class NewtonDivergence : public NumericalError {
public:
    NewtonDivergence(std::size_t level, int iterations, double residual)
        : NumericalError("Newton iteration did not converge at level " + std::to_string(level) +
                         " after " + std::to_string(iterations) +
                         " iterations (residual " + std::to_string(residual) + ")"),
          level_(level), iterations_(iterations), residual_(residual) {}

    std::size_t level() const noexcept { return level_; }
    int iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    std::size_t level_;
    int iterations_;
    double residual_;
};

class SingularMatrix : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// An iterative eigen/norm routine ran out of iterations.
class ConvergenceFailure : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace bdf3
