#pragma once

#include <stdexcept>
#include <string>

namespace wdeg {

/// Raised when an argument is syntactically valid but outside the
/// accepted value range (non-finite entries, nonpositive magnitudes, ...).
struct invalid_input : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Raised when an operation is evaluated at a point where it is
/// mathematically undefined (e.g. a Jacobian at the origin).
struct domain_error : std::domain_error {
    using std::domain_error::domain_error;
};

/// Raised when a documented precondition of an operation fails.
struct precondition_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Raised when a quantity is requested at a point of the degeneracy set
/// where it diverges or is meaningless.
struct degenerate_point_error : domain_error {
    using domain_error::domain_error;
};

/// Raised on NaN/Inf appearing inside an iterative method.
struct numerical_failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised on malformed configuration files or unknown keys.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised by the expression parser; carries the offending position.
struct parse_error : std::runtime_error {
    parse_error(const std::string& what, std::size_t position)
        : std::runtime_error(what + " (at position " + std::to_string(position) + ")"),
          position(position) {}
    std::size_t position;
};

}  // namespace wdeg
