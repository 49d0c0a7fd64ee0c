#ifndef NOMA_EC_ERRORS_HPP
#define NOMA_EC_ERRORS_HPP

#include <cmath>
#include <stdexcept>
#include <string>

namespace noma_ec {

/// Argument outside the mathematical domain of an operation.
class domain_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A numerical procedure (quadrature, series) failed to reach its tolerance.
class convergence_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// User or rank index out of range for the configured population.
class index_error : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Requested evaluation mode is not supported by this routine.
class unsupported_mode : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

namespace detail {

inline void require_finite(double v, const char* what)
{
    if (!std::isfinite(v)) {
        throw domain_error(std::string(what) + " must be finite");
    }
}

inline void require(bool cond, const std::string& msg)
{
    if (!cond) {
        throw domain_error(msg);
    }
}

} // namespace detail
} // namespace noma_ec

#endif
