#pragma once

#include <stdexcept>
#include <string>

namespace qlcm {

// A request the library understands but refuses because it exceeds a configured
// resource bound (e.g. the quadratic variance limit or the enumeration size).
class ResourceLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An exact operation that would have to produce an inexact result.
class ExactnessError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace qlcm
