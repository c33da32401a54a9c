#pragma once

#include <stdexcept>
#include <string>

namespace crowdsweep {

/// Bad or unresolvable configuration (unknown method tag, invalid sweep
/// name, malformed config file). CLI exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Filesystem failures: unwritable output directory, missing or corrupt
/// result files. CLI exit code 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Violated internal invariant (seed/hash mismatch on replay, infeasible
/// scenario generation). CLI exit code 3.
class InternalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace crowdsweep
