#pragma once

#include <stdexcept>

namespace oukit {

/// Parameter vector outside the admissible domain (theta > 0, sigma_sq > 0, finite).
class ParameterDomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Observation grid unusable: dt <= 0 or no transitions.
class DegenerateGrid : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Series has zero variance somewhere a correlation is needed.
class ConstantSeries : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Series too short for the requested statistic.
class TooShort : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Line search called with a non-descent direction (g'p >= 0).
class NotDescent : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// No strong-Wolfe step found within the iteration budget.
class LineSearchFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every optimization stage diverged or produced no usable point.
class OptimizationFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Backward pass given a cache that does not belong to the model/forward call.
class CacheMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class EmptyDataset : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class EmptyInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace oukit
