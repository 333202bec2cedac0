#pragma once

#include <stdexcept>
#include <string>

namespace fracdelay {

/// Thrown when a series or an adaptive quadrature fails to reach its
/// tolerance within the configured budget. Carries the state at abort so
/// callers can report diagnostics or retry with a larger budget.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(std::string msg, double partial, double last_term, long steps)
        : std::runtime_error(std::move(msg)),
          partial_value(partial),
          last_term_size(last_term),
          steps_used(steps) {}

    double partial_value;    // partial sum (scalar) or its norm (matrix/vector case)
    double last_term_size;   // magnitude of the last term / refinement difference
    long steps_used;
};

} // namespace fracdelay
