#pragma once

// Lumped dynamic models of the glove actuators and of the follower's palm
// temperature membrane.  All integrators are explicit trapezoidal (Heun)
// steps at a caller-supplied fixed dt.

#include <array>
#include <cstddef>

#include "mfe/mapping.hpp"

namespace mfe {

inline constexpr double kPlantDt = 1e-3;  // s

// ---------------------------------------------------------------------------
// Finger servo

struct MotorPlant {
  double stall_torque = 0.52;        // Nm
  double resistance_torque = 0.03;   // Nm, unpowered back-drive resistance
  double current_limit = 1750.0;     // mA
  double commanded_current = 0.0;    // mA

  double torque_constant() const { return stall_torque / current_limit; }  // Nm/mA
};

/// Linear torque with symmetric clipping to the stall torque.
double motor_torque(const MotorPlant& plant, double current);

// ---------------------------------------------------------------------------
// Electro-osmotic fingertip actuator

struct FluidicResponse {
  double voltage = 0.0;            // V (magnitude)
  double steady_gain = 0.0;        // kPa
  double natural_frequency = 0.0;  // rad/s
  double damping_ratio = 0.0;
  bool calibrated = false;         // anchored to measured data
};

inline constexpr double kFluidicMaxVoltage = 200.0;
inline constexpr double kPeakPressureKpa = 2.47;
inline constexpr double kPeakProtrusionMm = 1.65;

struct MicrofluidicPlant {
  double drive_voltage = 0.0;  // V in [-200, 200]
  double pressure = 0.0;       // kPa
  double pressure_rate = 0.0;  // kPa/s
  /// Rows at |V| = 50, 100, 150, 200 V, ascending.
  std::array<FluidicResponse, 4> table = default_table();

  double protrusion() const { return pressure * kPeakProtrusionMm / kPeakPressureKpa; }  // mm

  /// Response parameters at |V|, linearly interpolated between rows; below
  /// the lowest row the gain scales to zero at 0 V.
  FluidicResponse response(double voltage) const;

  static std::array<FluidicResponse, 4> default_table();
};

/// Advances the second-order pressure model by dt (0 < dt <= 1 ms).
MicrofluidicPlant step_microfluidic(MicrofluidicPlant plant, double dt);

// ---------------------------------------------------------------------------
// Thermoelectric palm module

struct ThermoPlant {
  double drive_voltage = 0.0;  // V in [-5, 5]
  double surface_temp = kAmbientC;
  double ambient = kAmbientC;
  double time_constant = 1.2;  // s
  /// Steady surface temperature at -5 V and +5 V (the 0 V anchor is ambient).
  double cold_limit = 10.0;
  double hot_limit = 55.0;

  /// Piecewise-linear V -> steady degC through (-5, cold), (0, ambient), (+5, hot).
  double steady_temp(double voltage) const;
};

inline constexpr double kThermoMaxVoltage = 5.0;
inline constexpr double kThermoGuardMin = 0.0;
inline constexpr double kThermoGuardMax = 80.0;

/// First-order relaxation toward steady_temp(V) (0 < dt <= 10 ms).
ThermoPlant step_thermo(ThermoPlant plant, double dt);

// ---------------------------------------------------------------------------
// Surface temperature controller

struct PidController {
  double kp = 1.0;   // V/degC
  double ki = 0.2;   // V/(degC s)
  double kd = 0.0;   // V s/degC
  double output_limit = kThermoMaxVoltage;
  double windup_limit = 50.0;  // bound on the integral state, degC s
  double integral = 0.0;
  double last_measured = 0.0;
  bool primed = false;  // false until the first measurement seeds the derivative

  void reset() {
    integral = 0.0;
    primed = false;
  }
};

/// PID with derivative on measurement and conditional integration: the
/// integral is frozen whenever the output would saturate.  Returns volts.
double pid_step(PidController& ctrl, double setpoint, double measured, double dt);

// ---------------------------------------------------------------------------
// Follower palm membrane (27 sensors)

struct MembranePlant {
  std::array<double, kPalmSensors> temps{};
  double ambient = kAmbientC;
  double time_constant = 0.5;  // s

  static MembranePlant at_ambient(double ambient = kAmbientC);
};

/// Which sensors touch the object.
using ContactMask = std::array<bool, kPalmSensors>;

ContactMask full_contact();
ContactMask central_contact(const MappingConfig& cfg = {});
ContactMask no_contact();

/// Each sensor relaxes toward object_temp (in contact) or ambient.  Returns the new readings.
std::array<double, kPalmSensors> sense_membrane(double object_temp, MembranePlant& plant,
                                                const ContactMask& contact, double dt);

}  // namespace mfe
