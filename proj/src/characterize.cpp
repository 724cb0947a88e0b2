#include "mfe/characterize.hpp"

#include <cmath>
#include <sstream>

#include "mfe/errors.hpp"
#include "mfe/kinematics.hpp"
#include "mfe/plants.hpp"

namespace mfe {

namespace {

std::size_t steps_for(double duration_s) {
  if (!(duration_s > 0.0) || !std::isfinite(duration_s)) throw ConfigError("duration must be > 0");
  return static_cast<std::size_t>(std::llround(duration_s / kPlantDt));
}

std::ostringstream csv_stream() {
  std::ostringstream out;
  out.precision(9);
  return out;
}

}  // namespace

std::string characterize_motor_csv(double step_mA) {
  if (!(step_mA > 0.0)) throw ConfigError("current step must be > 0");
  const MotorPlant motor;
  const auto geom = default_geometry();
  auto out = csv_stream();
  out << "current_mA,torque_Nm,rest_force_N\n";
  for (double i = 0.0; i <= motor.current_limit + 1e-9; i += step_mA) {
    const double tau = motor_torque(motor, i);
    out << i << ',' << tau << ',' << fingertip_force(geom, rest_pose(), tau) << '\n';
  }
  return out.str();
}

std::string characterize_fluidic_csv(const std::vector<double>& voltages, double duration_s) {
  const std::size_t n = steps_for(duration_s);
  auto out = csv_stream();
  out << "t_s,input,pressure_kPa,protrusion_mm\n";
  for (double v : voltages) {
    if (!(std::abs(v) <= kFluidicMaxVoltage)) throw ConfigError("fluidic voltage outside +-200 V");
    MicrofluidicPlant p;
    p.drive_voltage = v;
    out << 0.0 << ',' << v << ',' << p.pressure << ',' << p.protrusion() << '\n';
    for (std::size_t i = 1; i <= n; ++i) {
      p = step_microfluidic(p, kPlantDt);
      out << i * kPlantDt << ',' << v << ',' << p.pressure << ',' << p.protrusion() << '\n';
    }
  }
  return out.str();
}

std::string characterize_thermo_csv(const std::vector<double>& voltages, double duration_s,
                                    std::optional<double> setpoint) {
  const std::size_t n = steps_for(duration_s);
  auto out = csv_stream();
  out << "t_s,voltage_V,temp_C\n";
  if (setpoint) {
    ThermoPlant p;
    PidController pid;
    out << 0.0 << ',' << 0.0 << ',' << p.surface_temp << '\n';
    for (std::size_t i = 1; i <= n; ++i) {
      p.drive_voltage = pid_step(pid, *setpoint, p.surface_temp, kPlantDt);
      p = step_thermo(p, kPlantDt);
      out << i * kPlantDt << ',' << p.drive_voltage << ',' << p.surface_temp << '\n';
    }
    return out.str();
  }
  for (double v : voltages) {
    if (!(std::abs(v) <= kThermoMaxVoltage)) throw ConfigError("thermo voltage outside +-5 V");
    ThermoPlant p;
    p.drive_voltage = v;
    out << 0.0 << ',' << v << ',' << p.surface_temp << '\n';
    for (std::size_t i = 1; i <= n; ++i) {
      p = step_thermo(p, kPlantDt);
      out << i * kPlantDt << ',' << v << ',' << p.surface_temp << '\n';
    }
  }
  return out.str();
}

}  // namespace mfe
