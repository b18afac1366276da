#pragma once

#include <stdexcept>
#include <string>

namespace cmvno {

/// Malformed model or experiment configuration, detected at construction time.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An argument outside the domain of an operation (non-positive gain, channel
/// outside the sensing band, mismatched dimensions).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The requested instance exceeds what an exhaustive routine is allowed to
/// enumerate.
class CapabilityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Broken internal invariant (iteration cap overrun, bound violation in strict
/// mode).
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Output location missing or not writable.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cmvno
