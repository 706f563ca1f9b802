#pragma once

#include <stdexcept>
#include <string>

namespace eventlens {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input or configuration. The CLI maps these to exit status 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// The data cannot support the requested analysis. The CLI maps these to
/// exit status 2.
class DataError : public Error {
 public:
  using Error::Error;
};

class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ParseError : public DataError {
 public:
  using DataError::DataError;
};

class ConflictError : public DataError {
 public:
  using DataError::DataError;
};

class LookupError : public DataError {
 public:
  using DataError::DataError;
};

class CoverageError : public DataError {
 public:
  using DataError::DataError;
};

class EmptyJoinError : public DataError {
 public:
  using DataError::DataError;
};

class MissingFactorError : public DataError {
 public:
  using DataError::DataError;
};

class SingularDesignError : public DataError {
 public:
  using DataError::DataError;
};

class SampleSizeError : public DataError {
 public:
  using DataError::DataError;
};

class DegenerateLabelsError : public DataError {
 public:
  using DataError::DataError;
};

class DegenerateVarianceError : public DataError {
 public:
  using DataError::DataError;
};

class NotPositiveDefiniteError : public DataError {
 public:
  using DataError::DataError;
};

class NoSupportError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace eventlens
