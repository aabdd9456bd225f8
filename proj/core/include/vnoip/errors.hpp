#pragma once

#include <stdexcept>
#include <string>

namespace vnoip {

/// Exit-code categories reported by the CLI (0 = success).
enum class ErrorCategory : int {
  generic = 1,
  parse = 2,
  config = 3,
  numeric = 4,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}
  ErrorCategory category() const noexcept { return category_; }

private:
  ErrorCategory category_;
};

/// Mismatched tensor extents, non-scalar loss, and similar contract breaks.
struct ShapeError : Error {
  explicit ShapeError(const std::string& w) : Error(ErrorCategory::numeric, w) {}
};

/// Domain violations, degenerate masks, solver budget/stiffness failures, NaN losses.
struct NumericError : Error {
  explicit NumericError(const std::string& w) : Error(ErrorCategory::numeric, w) {}
};

/// Invalid configuration: bad dimensions, horizons, supercritical generators.
struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(ErrorCategory::config, w) {}
};

/// Malformed input files. Carries the 1-based line number when known.
class ParseError : public Error {
public:
  explicit ParseError(const std::string& w, long line = 0)
      : Error(ErrorCategory::parse,
              line > 0 ? "line " + std::to_string(line) + ": " + w : w),
        line_(line) {}
  long line() const noexcept { return line_; }

private:
  long line_;
};

/// Internal assertion: inference code touched post-observation popularity.
struct LeakError : std::logic_error {
  explicit LeakError(const std::string& w) : std::logic_error(w) {}
};

}  // namespace vnoip
