#pragma once

#include <stdexcept>
#include <string>

namespace hbac {

/// Invalid spin system, timing, program parameters or instruction indices.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The requested backend cannot execute the request (e.g. SORT on the bias
/// engine, or a state-vector run beyond the size cap).
class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace detail
}  // namespace hbac
