#pragma once
#include <stdexcept>
#include <string>

namespace rmtkit {

// Ensemble or regime parameters violate a positivity/ordering constraint.
struct parameter_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Contour construction cannot satisfy the enclose/exclude/clearance requirements.
struct geometry_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A quadrature or iterative scheme failed to reach the requested tolerance.
struct convergence_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A linear system is too ill-conditioned to invert reliably.
struct conditioning_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed run configuration (missing/ill-typed fields, unknown schema).
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace rmtkit
