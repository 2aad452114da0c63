#pragma once

#include <stdexcept>

namespace gtsim {

/// A parameter lies outside its documented domain.
struct InvalidParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Inputs contradict the noiseless OR-channel model (e.g. a negative test
/// containing an infected member, or outcomes no weight-k truth can produce).
struct ModelViolationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An exact enumeration refused to run because the instance exceeds its cap.
struct ResourceLimitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Filesystem-level failure (unreadable config, unwritable output path).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace gtsim
