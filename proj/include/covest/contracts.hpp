#pragma once

#include <stdexcept>
#include <string>

namespace covest {

/// Thrown when an operation's stated precondition is violated by the caller.
class ContractError : public std::invalid_argument {
public:
    explicit ContractError(const std::string& what) : std::invalid_argument(what) {}
};

/// Thrown when an iterative routine runs out of budget. Carries the best
/// estimate reached so that callers can inspect or report it.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double best_estimate, double achieved_gap)
        : std::runtime_error(what), best(best_estimate), gap(achieved_gap) {}

    double best = 0.0;
    double gap = 0.0;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ContractError(msg);
}

} // namespace covest
