#ifndef MEASURE_DYN_ERRORS_HPP
#define MEASURE_DYN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace measure_dyn {

inline constexpr const char* version_string = "0.1.0";

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed preset strings, CLI configs, tabulated-kernel files.
struct config_error : error {
    using error::error;
};

/// An operation precondition does not hold at the working resolution.
struct precondition_error : error {
    using error::error;
};

/// Two distinct atoms map onto the same location: the map is not injective
/// at the current merge tolerance.
struct collision_error : error {
    using error::error;
};

/// Negative kernel sample or vanishing row integral.
struct kernel_error : error {
    using error::error;
};

/// invariant_measure refuses to iterate without a passing contraction
/// certificate: no convergence guarantee exists.
struct contraction_not_certified : error {
    using error::error;
};

}  // namespace measure_dyn

#endif
