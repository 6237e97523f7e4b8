#pragma once

#include <stdexcept>
#include <string>

namespace wpt {

// Bad user input: parameters out of domain, malformed configs.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computed object broke one of its structural guarantees (corrupted Q
// table, stopping region that is not single-crossing, ...).
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace wpt
