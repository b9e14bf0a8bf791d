#pragma once

#include <stdexcept>
#include <string>

namespace shl0 {

/// Weighted Gram matrix of the requested column subset is numerically rank
/// deficient. The search layer treats this as "move not available".
struct SingularDesign : std::runtime_error {
    explicit SingularDesign(const std::string& what) : std::runtime_error(what) {}
};

/// Every observation received a (numerically) zero IRLS weight.
struct DegenerateWeights : std::runtime_error {
    explicit DegenerateWeights(const std::string& what) : std::runtime_error(what) {}
};

/// A move was applied to a model it does not fit (e.g. removing an absent pair).
struct InvalidMove : std::logic_error {
    explicit InvalidMove(const std::string& what) : std::logic_error(what) {}
};

/// Bad user-facing configuration (unknown column, invalid option value, ...).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input file; carries a human-readable location.
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace shl0
