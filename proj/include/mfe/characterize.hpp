#pragma once

// Bench-style characterization runs of the device plants, emitted as CSV.

#include <optional>
#include <string>
#include <vector>

namespace mfe {

/// `current_mA,torque_Nm,rest_force_N` over a current sweep (step in mA).
std::string characterize_motor_csv(double step_mA = 50.0);

/// Step responses at each voltage: `t_s,input,pressure_kPa,protrusion_mm`.
std::string characterize_fluidic_csv(const std::vector<double>& voltages, double duration_s);

/// Open-loop steps at each voltage, or a closed PID step when setpoint is
/// given: `t_s,voltage_V,temp_C`.
std::string characterize_thermo_csv(const std::vector<double>& voltages, double duration_s,
                                    std::optional<double> setpoint = std::nullopt);

}  // namespace mfe
