#pragma once

#include <stdexcept>
#include <string>

namespace kw {

enum class errc {
    ok = 0,
    invalid_argument,
    invalid_exponent,
    unsupported_exponent,
    dimension_mismatch,
    group_too_large,
    size_overflow,
    invalid_law,
    degenerate_coordinate,
    unsupported_structure,
    invalid_pair,
    solver_failure,
    incomparable,
    config_error,
    io_error,
    internal,
};

class error : public std::runtime_error {
public:
    error(errc code, std::string msg)
        : std::runtime_error(std::move(msg)), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

// Iterative solve gave up before certifying the requested tolerance. The
// carried value is still a valid upper bound on the true optimum.
class solver_failure : public error {
public:
    solver_failure(std::string msg, double best, double residual)
        : error(errc::solver_failure, std::move(msg)),
          best_value(best),
          kkt_residual(residual) {}

    double best_value;
    double kkt_residual;
};

[[noreturn]] inline void fail(errc c, const std::string& msg) {
    throw error(c, msg);
}

} // namespace kw
