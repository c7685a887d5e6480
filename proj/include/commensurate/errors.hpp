#pragma once

#include <stdexcept>
#include <string>

namespace commensurate {

// Configured cap exceeded (subgroup counts, coset limits, search budgets).
struct ResourceCapError : std::runtime_error {
    explicit ResourceCapError(const std::string& what) : std::runtime_error(what) {}
};

// A numeric routine left its tolerance envelope (residuals, degenerate fixed
// points, boundary-ambiguous polygon reductions).
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Caller violated a documented precondition.
struct PreconditionError : std::invalid_argument {
    explicit PreconditionError(const std::string& what) : std::invalid_argument(what) {}
};

// Input data fails a structural invariant (malformed diagram, bad config).
struct InvariantError : std::runtime_error {
    explicit InvariantError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace commensurate
