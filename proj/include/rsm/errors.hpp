#pragma once

#include <stdexcept>
#include <string>

namespace rsm {

// Raised when an evaluation leaves the domain of an elementary function
// (log of a non-positive value, division by zero, non-finite result, ...).
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a map fails the immersion (full-rank differential) check.
class RegularityError : public std::runtime_error {
public:
    explicit RegularityError(const std::string& what) : std::runtime_error(what) {}
};

// Raised on malformed API usage: mismatched dimensions, unsupported orders,
// out-of-domain sample points, invalid construction parameters.
class InvalidArgument : public std::invalid_argument {
public:
    explicit InvalidArgument(const std::string& what) : std::invalid_argument(what) {}
};

// Raised where a space curve has (numerically) vanishing curvature, so the
// principal normal and binormal do not exist.
class FrenetUndefinedError : public std::runtime_error {
public:
    explicit FrenetUndefinedError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace rsm
