#pragma once

#include <stdexcept>

namespace voxpath {

// Error categories, mapped onto CLI exit codes: config 2, numeric/solver 3,
// I/O 4. Argument/range violations use the std exceptions directly.

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct solver_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct detection_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace voxpath
