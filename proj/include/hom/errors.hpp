#pragma once

#include <stdexcept>
#include <string>

namespace hom {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Time grid too short to hold the emission profile.
class TruncationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GridMismatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Filter narrower than the homogeneous line.
class UnsupportedRegimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inputs that combine into an unphysical result (e.g. M > 1).
class InconsistentInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RankDeficientError : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hom
