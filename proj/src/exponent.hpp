#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "errors.hpp"

namespace kw {

// Exponents live in [1, inf]. Infinity is the IEEE infinity, not a large
// float; conjugation maps 1 <-> inf and q <-> q/(q-1) otherwise.
inline constexpr double inf_exponent = std::numeric_limits<double>::infinity();

inline bool is_inf_exponent(double q) { return std::isinf(q) && q > 0; }

inline void require_exponent(double q, const char* who) {
    if (std::isnan(q) || q < 1.0) {
        fail(errc::invalid_exponent,
             std::string(who) + ": exponent must be in [1, inf], got " + std::to_string(q));
    }
}

inline double conjugate_exponent(double q) {
    require_exponent(q, "conjugate_exponent");
    if (is_inf_exponent(q)) return 1.0;
    if (q == 1.0) return inf_exponent;
    return q / (q - 1.0);
}

} // namespace kw
