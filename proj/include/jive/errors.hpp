#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace jive {

/// Raised for invalid arguments: bad ranks, mismatched shapes, malformed files.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A documented precondition on the data does not hold (e.g. rows not centered).
class PreconditionError : public InputError {
 public:
  using InputError::InputError;
};

/// A permutation replicate failed; carries the replicate index.
class ReplicateError : public std::runtime_error {
 public:
  ReplicateError(std::size_t replicate, const std::string& what)
      : std::runtime_error("replicate " + std::to_string(replicate) + ": " + what),
        replicate_(replicate) {}

  std::size_t replicate() const noexcept { return replicate_; }

 private:
  std::size_t replicate_;
};

}  // namespace jive
