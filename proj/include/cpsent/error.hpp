#pragma once

#include <stdexcept>
#include <string>

namespace cpsent {

/// How a failure should be reported by the command-line front end.
enum class ErrorCategory {
  Usage,         // bad input, config or schema violation
  Invariant,     // an internal invariant failed
  Inconclusive,  // finite computation could not decide
};

class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message,
        ErrorCategory category = ErrorCategory::Usage)
      : std::runtime_error(message), code_(std::move(code)), category_(category) {}

  const std::string& code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return category_; }

 private:
  std::string code_;
  ErrorCategory category_;
};

}  // namespace cpsent
