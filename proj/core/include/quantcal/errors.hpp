#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace quantcal {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes that do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A scalar argument outside its mathematical domain (e.g. q not in (0,1)).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An API called in a state or with arguments it does not support.
class UsageError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss.
class NanLossError : public Error {
 public:
  using Error::Error;
};

}  // namespace quantcal
