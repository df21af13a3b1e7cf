#pragma once

#include <stdexcept>
#include <string>

namespace fgb {

// Malformed or out-of-domain input (bad generator index, mass != 1, ...).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An enumeration would exceed the configured cap.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A documented precondition does not hold (window too small, cylinder too
// shallow, ...).
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// The requested quantity is not determined at this resolution; the caller
// should refine the cylinder/window and retry.
class RefineRequest : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fgb
