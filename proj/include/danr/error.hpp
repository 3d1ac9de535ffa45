#pragma once

#include <stdexcept>
#include <string>

namespace danr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for malformed user input (files, CLI values, parameters).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

class InvalidEdge : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class TooFewPoints : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class DimensionMismatch : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class NonFinite : public Error {
 public:
  using Error::Error;
};

class SingularSystem : public Error {
 public:
  using Error::Error;
};

class MissingFixedModel : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class EmptyResults : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

}  // namespace danr
