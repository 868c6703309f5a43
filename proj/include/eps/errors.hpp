#pragma once

#include <stdexcept>
#include <string>

namespace eps {

// Bad arguments to a pricer or constructor (precondition violations).
struct InvalidInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// The inputs are valid but the computation has no meaningful answer,
// e.g. a degenerate distribution or a vanishing fee leg.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidInput(what);
}

}  // namespace eps
