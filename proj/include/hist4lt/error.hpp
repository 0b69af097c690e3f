#pragma once

#include <stdexcept>
#include <string>

namespace hist4lt {

// Index or query outside the attribute domain / bucket.
class RangeError : public std::out_of_range {
 public:
  explicit RangeError(const std::string& what) : std::out_of_range(what) {}
};

// Bad parameters: payload/kind mismatch, budget too small, unsupported sizes.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// A data structure invariant does not hold (e.g. USA on a bucket with t = 0 and c > 0).
class InvariantError : public std::logic_error {
 public:
  explicit InvariantError(const std::string& what) : std::logic_error(what) {}
};

// Malformed external input (CSV, JSON).
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hist4lt
