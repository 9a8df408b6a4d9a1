#pragma once

#include <stdexcept>
#include <string>

namespace gsgi {

// Invalid configuration values or mismatched dimensions.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An operation was called in a state that does not permit it.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Tensor shape mismatch inside a numerical kernel.
class KernelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or incompatible file contents.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gsgi
