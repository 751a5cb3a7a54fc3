#ifndef INFSUP_ERRORS_HPP
#define INFSUP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace infsup {

/// Shape or ambient-dimension mismatch (vector lengths, layer chaining, ...).
class DimensionError : public std::invalid_argument {
 public:
  explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

/// Invalid sample/iteration counts (e.g. asking for zero samples).
class CountError : public std::invalid_argument {
 public:
  explicit CountError(const std::string& what) : std::invalid_argument(what) {}
};

/// Operation invoked in a state that does not support it (e.g. reverse sweep
/// on a tape whose forward pass has not produced a scalar yet).
class StateError : public std::logic_error {
 public:
  explicit StateError(const std::string& what) : std::logic_error(what) {}
};

/// Inconsistent problem/run configuration (label mismatches, bad files, ...).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Division by a vanishing normalizer (e.g. zero-norm exact solution).
class DivisionError : public std::runtime_error {
 public:
  explicit DivisionError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace infsup

#endif  // INFSUP_ERRORS_HPP
