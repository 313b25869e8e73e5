#pragma once

#include <stdexcept>
#include <string>

namespace gdnet {

// Base for everything thrown by the library. The CLI maps config_error to
// exit code 2 and every other gdnet::error to exit code 1.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct dimension_error : error {
  using error::error;
};

struct config_error : error {
  using error::error;
};

// Bad file contents (magic number, truncation, invalid pixel values).
struct format_error : error {
  using error::error;
};

struct io_error : error {
  using error::error;
};

// Non-finite values where finite ones are required (diverged loss, bad probe).
struct numeric_error : error {
  using error::error;
};

// Inputs too degenerate to proceed (constant FCM input, class below minimum).
struct degenerate_input_error : error {
  using error::error;
};

struct generation_error : error {
  using error::error;
};

}  // namespace gdnet
