#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace iwpp {

/// Bad arguments from the caller (out-of-bounds coordinates, zero tile sizes).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input images violate an operator precondition, e.g. marker > mask.
class ContractViolation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The distance transform has no background pixel to measure from.
class NoBackgroundError : public std::domain_error {
 public:
  NoBackgroundError() : std::domain_error("no background reachable") {}
};

/// Malformed or truncated image file.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace iwpp
