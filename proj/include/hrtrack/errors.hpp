#pragma once

#include <stdexcept>

namespace hrtrack {

// Missing or malformed input data: files, rows, value ranges, model files.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace hrtrack
