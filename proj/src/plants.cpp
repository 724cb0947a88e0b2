#include "mfe/plants.hpp"

#include <algorithm>
#include <cmath>

#include "mfe/errors.hpp"

namespace mfe {

double motor_torque(const MotorPlant& plant, double current) {
  return std::clamp(plant.torque_constant() * current, -plant.stall_torque, plant.stall_torque);
}

std::array<FluidicResponse, 4> MicrofluidicPlant::default_table() {
  // Peaks proportional to voltage (2.47 kPa at 200 V), damping rising as the
  // voltage drops; steady gains are peak / (1 + overshoot).  Only the 200 V row
  // is anchored to measurements.
  return {{
      {50.0, 0.59035, 8.0, 0.70, false},
      {100.0, 1.13979, 8.0, 0.62, false},
      {150.0, 1.64473, 8.0, 0.55, false},
      {200.0, 2.10, 8.0, 0.48370, true},
  }};
}

FluidicResponse MicrofluidicPlant::response(double voltage) const {
  const double v = std::min(std::abs(voltage), kFluidicMaxVoltage);
  if (v <= table.front().voltage) {
    FluidicResponse r = table.front();
    r.steady_gain *= v / table.front().voltage;
    r.voltage = v;
    return r;
  }
  for (std::size_t i = 1; i < table.size(); ++i) {
    if (v <= table[i].voltage) {
      const auto& a = table[i - 1];
      const auto& b = table[i];
      const double w = (v - a.voltage) / (b.voltage - a.voltage);
      return {v, a.steady_gain + w * (b.steady_gain - a.steady_gain),
              a.natural_frequency + w * (b.natural_frequency - a.natural_frequency),
              a.damping_ratio + w * (b.damping_ratio - a.damping_ratio),
              w == 1.0 ? b.calibrated : (w == 0.0 && a.calibrated)};
    }
  }
  return table.back();
}

MicrofluidicPlant step_microfluidic(MicrofluidicPlant plant, double dt) {
  if (!(dt > 0.0 && dt <= 1e-3)) throw IntegrationError("microfluidic dt must be in (0, 1 ms]");
  const double v = std::clamp(plant.drive_voltage, -kFluidicMaxVoltage, kFluidicMaxVoltage);
  const FluidicResponse r = plant.response(v);
  const double target = std::copysign(r.steady_gain, v);
  const double wn = r.natural_frequency;
  const double zeta = r.damping_ratio;
  auto accel = [&](double p, double rate) {
    return wn * wn * (target - p) - 2.0 * zeta * wn * rate;
  };
  const double p0 = plant.pressure;
  const double v0 = plant.pressure_rate;
  const double a0 = accel(p0, v0);
  const double p1 = p0 + dt * v0;
  const double v1 = v0 + dt * a0;
  const double a1 = accel(p1, v1);
  plant.pressure = p0 + 0.5 * dt * (v0 + v1);
  plant.pressure_rate = v0 + 0.5 * dt * (a0 + a1);
  return plant;
}

double ThermoPlant::steady_temp(double voltage) const {
  const double v = std::clamp(voltage, -kThermoMaxVoltage, kThermoMaxVoltage);
  if (v >= 0.0) return ambient + (hot_limit - ambient) * v / kThermoMaxVoltage;
  return ambient + (ambient - cold_limit) * v / kThermoMaxVoltage;
}

ThermoPlant step_thermo(ThermoPlant plant, double dt) {
  if (!(dt > 0.0 && dt <= 1e-2)) throw IntegrationError("thermo dt must be in (0, 10 ms]");
  const double target = plant.steady_temp(plant.drive_voltage);
  const double tau = plant.time_constant;
  const double t0 = plant.surface_temp;
  const double d0 = (target - t0) / tau;
  const double d1 = (target - (t0 + dt * d0)) / tau;
  plant.surface_temp = std::clamp(t0 + 0.5 * dt * (d0 + d1), kThermoGuardMin, kThermoGuardMax);
  return plant;
}

double pid_step(PidController& ctrl, double setpoint, double measured, double dt) {
  if (!(dt > 0.0)) throw DomainError("pid dt must be > 0");
  const double error = setpoint - measured;
  double derivative = 0.0;
  if (ctrl.primed) derivative = -(measured - ctrl.last_measured) / dt;
  ctrl.last_measured = measured;
  ctrl.primed = true;

  const double candidate =
      std::clamp(ctrl.integral + error * dt, -ctrl.windup_limit, ctrl.windup_limit);
  const double trial = ctrl.kp * error + ctrl.ki * candidate + ctrl.kd * derivative;
  if (std::abs(trial) <= ctrl.output_limit) ctrl.integral = candidate;

  const double out = ctrl.kp * error + ctrl.ki * ctrl.integral + ctrl.kd * derivative;
  if (std::isnan(out)) return 0.0;
  return std::clamp(out, -ctrl.output_limit, ctrl.output_limit);
}

MembranePlant MembranePlant::at_ambient(double ambient) {
  MembranePlant m;
  m.ambient = ambient;
  m.temps.fill(ambient);
  return m;
}

ContactMask full_contact() {
  ContactMask m;
  m.fill(true);
  return m;
}

ContactMask central_contact(const MappingConfig& cfg) {
  ContactMask m = no_contact();
  for (auto i : cfg.central_indices) m.at(i) = true;
  return m;
}

ContactMask no_contact() {
  ContactMask m;
  m.fill(false);
  return m;
}

std::array<double, kPalmSensors> sense_membrane(double object_temp, MembranePlant& plant,
                                                const ContactMask& contact, double dt) {
  const double tau = plant.time_constant;
  for (std::size_t i = 0; i < kPalmSensors; ++i) {
    const double target = contact[i] ? object_temp : plant.ambient;
    const double t0 = plant.temps[i];
    const double d0 = (target - t0) / tau;
    const double d1 = (target - (t0 + dt * d0)) / tau;
    plant.temps[i] = t0 + 0.5 * dt * (d0 + d1);
  }
  return plant.temps;
}

}  // namespace mfe
