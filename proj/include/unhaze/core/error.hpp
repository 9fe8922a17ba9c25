#pragma once

#include <stdexcept>
#include <string>

namespace unhaze {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem-level failure: missing file, unreadable stream, failed write.
struct IoError : Error {
  using Error::Error;
};

// A file exists but its contents violate the expected format.
struct FormatError : Error {
  using Error::Error;
};

// Images or maps with incompatible or invalid dimensions / value ranges.
struct ShapeError : Error {
  using Error::Error;
};

// Invalid configuration or parameter values.
struct ConfigError : Error {
  using Error::Error;
};

// Label pool on disk is inconsistent with its manifest.
struct PoolError : Error {
  using Error::Error;
};

}  // namespace unhaze
