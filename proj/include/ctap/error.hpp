#pragma once

#include <stdexcept>
#include <string>

namespace ctap {

/// Invalid input: bad parameters, malformed schedules, out-of-range sites.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// A numerical tolerance was exceeded (norm drift, lost unitarity).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ctap
