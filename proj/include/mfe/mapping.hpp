#pragma once

// Leader-side haptic rendering laws: force -> motor current, force ->
// microfluidic PWM duty, palm temperature array -> thermoelectric setpoint.

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "mfe/kinematics.hpp"

namespace mfe {

inline constexpr std::size_t kPalmSensors = 27;
inline constexpr std::size_t kPalmRows = 3;
inline constexpr std::size_t kPalmCols = 9;
inline constexpr double kAmbientC = 24.0;

/// Row-major 3x9 palm layout; central nine = columns 3..5 (0-based) of every row.
std::vector<std::size_t> default_central_indices();

struct MappingConfig {
  double force_threshold = 1.47;                 // N
  double current_per_force = 1750.0 / 6000.0;    // mA per force unit
  double pressure_gain = 1000.0;                 // k, dimensionless
  double temp_min = 10.0;                        // degC
  double temp_max = 55.0;                        // degC
  double current_limit = 1750.0;                 // mA
  double ambient = kAmbientC;                    // degC, SAFE setpoint
  double hysteresis = 0.0;                       // N, band width around the threshold (0 = off)
  std::vector<std::size_t> central_indices = default_central_indices();

  void validate() const;
};

struct SensorFrame {
  std::array<double, kFingers> contact_force{};  // N
  std::array<double, kPalmSensors> palm_temps{};  // degC
  double timestamp = 0.0;                          // s

  static SensorFrame ambient(double temp = kAmbientC);
};

struct HapticCommand {
  std::array<double, kFingers> motor_current{};  // mA, positive resists flexion
  std::array<double, kFingers> pwm_duty{};       // [0, 1]
  double palm_setpoint = kAmbientC;              // degC
  std::uint32_t sequence = 0;

  bool is_safe(double ambient = kAmbientC) const;
  bool operator==(const HapticCommand&) const = default;
};

/// 0 when F <= F_t, otherwise clip(k_I * F, 0, current_limit).  Throws DomainError for F < 0.
double force_to_current(double force, const MappingConfig& cfg);

/// D = clip(k/1000 * (F - F_t), 0, 1); 0 when F <= F_t.  Throws DomainError for F < 0.
double pressure_duty(double force, const MappingConfig& cfg);

/// Mean of the central sensors clamped to [temp_min, temp_max].  Throws SensorFault on NaN.
double palm_setpoint(const SensorFrame& frame, const MappingConfig& cfg);

/// Stateful per-session mapper.  Owns the sequence counter and, when the
/// hysteresis band is enabled, the per-finger on/off latch.
class HapticMapper {
 public:
  explicit HapticMapper(MappingConfig cfg = {});

  const MappingConfig& config() const { return cfg_; }

  /// Applies the force, pressure and thermal laws.  On a sensor fault
  /// (NaN temperature, negative/NaN force) emits the SAFE command instead.
  HapticCommand compute_command(const SensorFrame& frame);

  /// Zero currents and duties, ambient setpoint; consumes a sequence number.
  HapticCommand safe_command();

  /// Resets hysteresis latches (e.g. after link loss).
  void reset_contact_state();

  std::uint32_t next_sequence() const { return sequence_ + 1; }

 private:
  bool gate(std::size_t finger, double force);

  MappingConfig cfg_;
  std::uint32_t sequence_ = 0;
  std::array<bool, kFingers> engaged_{};
};

}  // namespace mfe
