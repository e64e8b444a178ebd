#pragma once

#include <stdexcept>
#include <string>

namespace memstdp {

// Bad configuration or arguments; the CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Filesystem / serialization trouble; the CLI maps this to exit code 2.
class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace memstdp
