#pragma once

#include <stdexcept>
#include <string>

namespace kffnn {

/// Raised when a caller breaks an operation's precondition (shape mismatch,
/// out-of-range index, empty input, invalid configuration).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Training produced non-finite weights or loss; usually a learning rate that
/// is too large for the data scale.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent file content.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const char* message) {
  if (!condition) throw ContractError(message);
}

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractError(message);
}

}  // namespace kffnn
