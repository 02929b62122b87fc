#pragma once

#include <stdexcept>
#include <string>

namespace emim {

// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Incompatible tensor shapes or extents.
struct DimensionError : Error {
  explicit DimensionError(const std::string& msg) : Error(msg) {}
};

// Invalid or inconsistent configuration (window vs. extents, bad enum value, ...).
struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Operation invoked in the wrong state (e.g. backward without saved activations).
struct StateError : Error {
  explicit StateError(const std::string& msg) : Error(msg) {}
};

// I/O failure on fixture, checkpoint or report files.
struct IoError : Error {
  explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace emim
