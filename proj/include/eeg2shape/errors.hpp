#pragma once

#include <stdexcept>

namespace e2s {

// File-system level failures (missing or unwritable files).
class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration input (unknown keys, bad values).
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace e2s
