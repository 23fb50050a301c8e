#pragma once

#include <stdexcept>
#include <string>

namespace storychain {

/// Bad input data: malformed files, duplicate ids, unknown references.
/// The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A file could not be opened, read or written.
class IoError : public DataError {
  public:
    using DataError::DataError;
};

/// Invalid configuration key or value. The CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace storychain
