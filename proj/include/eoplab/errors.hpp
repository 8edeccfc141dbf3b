#pragma once

#include <stdexcept>
#include <string>

namespace eoplab {

/// Dimension or label mismatch between operands.
class ShapeError : public std::invalid_argument {
public:
    explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
};

/// Operand violates a construction invariant (hermiticity, positivity, trace, norm).
class InvalidInput : public std::invalid_argument {
public:
    explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

/// Configuration cannot produce a well-defined computation (e.g. ancilla too small).
class InvalidConfig : public std::invalid_argument {
public:
    explicit InvalidConfig(const std::string& what) : std::invalid_argument(what) {}
};

/// Requested computation exceeds the dense-solver budget.
class ResourceError : public std::runtime_error {
public:
    explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

/// Degenerate encoder branch: zero outcome probability with no fallback rule enabled.
class DegenerateBranchError : public std::runtime_error {
public:
    explicit DegenerateBranchError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input file; carries a human-readable location.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::string location)
        : std::runtime_error(what + " [" + location + "]"), location_(std::move(location)) {}
    const std::string& location() const noexcept { return location_; }

private:
    std::string location_;
};

}  // namespace eoplab
