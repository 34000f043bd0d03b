#pragma once

#include <stdexcept>
#include <string>

namespace phest {

/// Input outside the mathematical domain of an operation (negative noise level,
/// point outside the unit cube, empty point set, ...).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Index or window reaching outside the extended grid.
class BoundsError : public std::out_of_range {
 public:
  explicit BoundsError(const std::string& what) : std::out_of_range(what) {}
};

/// Structural precondition violated (non-monotone filtration, malformed file, ...).
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Requested computation exceeds a configured resource cap.
class ResourceError : public std::runtime_error {
 public:
  explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

/// Internal cross-check failed; indicates a bug rather than bad input.
class ConsistencyError : public std::logic_error {
 public:
  explicit ConsistencyError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace phest
