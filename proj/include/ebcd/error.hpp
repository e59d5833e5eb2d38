#pragma once

#include <stdexcept>
#include <string>

namespace ebcd {

// Raised for any input that violates a documented precondition. The message
// names the offending field (and row, for tabular input).
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace ebcd
