#pragma once

#include <stdexcept>
#include <string>

namespace specpercept {

// Error hierarchy. Callers that need to distinguish failure classes catch
// the subtype; the CLI maps any of these to a nonzero exit status.
class Error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// File could not be opened or read.
class IoError : public Error {
  using Error::Error;
};

// File exists but its contents violate the expected format
// (bad magic, truncated payload, version mismatch, garbled header).
class FormatError : public Error {
  using Error::Error;
};

// Well-formed input asking for something this library does not handle
// (exotic codecs, more than two channels, ...).
class UnsupportedError : public Error {
  using Error::Error;
};

// Two grids that must agree in shape do not.
class DimensionError : public Error {
  using Error::Error;
};

// Parameter set violates an operation's precondition.
class ParamError : public Error {
  using Error::Error;
};

}  // namespace specpercept
