#pragma once

#include <stdexcept>
#include <string>

namespace cgft {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition (shape mismatch, bad range, ...).
class InvalidArgument : public Error {
  public:
    using Error::Error;
};

/// Input data (files, records, label sets) is malformed or inconsistent.
class DataError : public Error {
  public:
    using Error::Error;
};

class ConfigError : public Error {
  public:
    using Error::Error;
};

class NotFound : public Error {
  public:
    using Error::Error;
};

class Conflict : public Error {
  public:
    using Error::Error;
};

/// Persistence failed. The operation had no effect and may be retried.
class StorageError : public Error {
  public:
    using Error::Error;
    [[nodiscard]] bool retryable() const noexcept { return true; }
};

} // namespace cgft
