#pragma once

#include <stdexcept>
#include <string>

namespace mfe {

/// Input outside the domain of an operation (angle out of limits, negative force, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Pose where the fingertip sits (numerically) on the actuated joint axis.
class SingularityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Workspace analysis could not produce a result (e.g. every pose singular).
class AnalysisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A sensor reading is unusable (NaN temperature).
class SensorFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Plant integration request outside the supported step range.
class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration file, scenario, or option.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mfe
