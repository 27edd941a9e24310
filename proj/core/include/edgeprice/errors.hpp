#pragma once

#include <stdexcept>
#include <string>

namespace edgeprice {

// A caller broke a documented precondition (length mismatch, pulls == 0, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A configuration value is outside what the model supports (K > V, E == 0, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace edgeprice
