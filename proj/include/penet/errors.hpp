#pragma once

#include <stdexcept>
#include <string>

namespace penet {

// The equivalence cubic has no admissible positive root (bracket term <= 0).
class no_physical_solution : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A geometric constraint is violated (t0 >= 2R, overlapping layers, ...).
class geometry_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Feature names / dimensions do not match the expected schema.
class schema_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Training produced a non-finite loss or gradient.
class divergence_error : public std::runtime_error {
 public:
  divergence_error(const std::string& what, std::size_t epoch)
      : std::runtime_error(what), epoch(epoch) {}
  std::size_t epoch;
};

}  // namespace penet
