#pragma once

#include <stdexcept>
#include <string>

namespace handsmooth {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition violated by the caller (bad dimensions, non-finite input,
// out-of-range step, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A point landed at or behind a camera's principal plane.
class BehindCamera : public Error {
 public:
  using Error::Error;
};

// No visible, projectable landmark is left to fit against.
class DegenerateObservation : public Error {
 public:
  using Error::Error;
};

// Malformed motion / noise / rig specification.
class SpecError : public Error {
 public:
  using Error::Error;
};

// A file failed schema validation.
class SchemaError : public Error {
 public:
  using Error::Error;
};

}  // namespace handsmooth
