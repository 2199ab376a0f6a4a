#pragma once

#include <stdexcept>
#include <string>

namespace netsynth {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller violated an operation's precondition (bad parameter, bad config).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Input data is unusable: malformed CSV, impossible targets, bad encodings.
class DataError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

class InfeasibleError : public DataError {
 public:
  using DataError::DataError;
};

class EncodingError : public DataError {
 public:
  using DataError::DataError;
};

// Numerical failure inside a fitting routine.
class FitError : public Error {
 public:
  using Error::Error;
};

}  // namespace netsynth
