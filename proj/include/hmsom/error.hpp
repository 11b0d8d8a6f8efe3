#pragma once

#include <stdexcept>
#include <string>

namespace hmsom {

/// Malformed or inconsistent input data, or a model that cannot be used with it.
/// The CLI maps this to exit code 2.
class data_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters supplied by the caller (out-of-range counts, bad flags).
class usage_error : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace hmsom
