#include "mfe/mapping.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mfe/errors.hpp"

namespace mfe {

std::vector<std::size_t> default_central_indices() {
  std::vector<std::size_t> idx;
  for (std::size_t r = 0; r < kPalmRows; ++r) {
    for (std::size_t c = 3; c <= 5; ++c) idx.push_back(r * kPalmCols + c);
  }
  return idx;
}

void MappingConfig::validate() const {
  if (!(force_threshold >= 0.0)) throw ConfigError("force threshold must be >= 0");
  if (!(current_per_force > 0.0)) throw ConfigError("force-to-current factor must be > 0");
  if (!(pressure_gain > 0.0)) throw ConfigError("pressure gain must be > 0");
  if (!(temp_min < temp_max)) throw ConfigError("temperature limits must satisfy min < max");
  if (!(current_limit > 0.0)) throw ConfigError("current limit must be > 0");
  if (!(hysteresis >= 0.0)) throw ConfigError("hysteresis band must be >= 0");
  if (central_indices.empty()) throw ConfigError("central sensor index set is empty");
  for (auto i : central_indices) {
    if (i >= kPalmSensors) throw ConfigError("central sensor index out of range");
  }
}

SensorFrame SensorFrame::ambient(double temp) {
  SensorFrame f;
  f.palm_temps.fill(temp);
  return f;
}

bool HapticCommand::is_safe(double ambient) const {
  return std::all_of(motor_current.begin(), motor_current.end(), [](double c) { return c == 0.0; }) &&
         std::all_of(pwm_duty.begin(), pwm_duty.end(), [](double d) { return d == 0.0; }) &&
         palm_setpoint == ambient;
}

namespace {

double current_law(double force, const MappingConfig& cfg) {
  return std::clamp(cfg.current_per_force * force, 0.0, cfg.current_limit);
}

double duty_law(double force, const MappingConfig& cfg) {
  return std::clamp(cfg.pressure_gain / 1000.0 * (force - cfg.force_threshold), 0.0, 1.0);
}

}  // namespace

double force_to_current(double force, const MappingConfig& cfg) {
  if (!(force >= 0.0)) throw DomainError("contact force must be >= 0");
  if (force <= cfg.force_threshold) return 0.0;
  return current_law(force, cfg);
}

double pressure_duty(double force, const MappingConfig& cfg) {
  if (!(force >= 0.0)) throw DomainError("contact force must be >= 0");
  if (force <= cfg.force_threshold) return 0.0;
  return duty_law(force, cfg);
}

double palm_setpoint(const SensorFrame& frame, const MappingConfig& cfg) {
  double sum = 0.0;
  for (auto i : cfg.central_indices) {
    const double t = frame.palm_temps.at(i);
    if (std::isnan(t)) throw SensorFault("palm sensor " + std::to_string(i) + " reads NaN");
    sum += t;
  }
  const double mean = sum / static_cast<double>(cfg.central_indices.size());
  return std::clamp(mean, cfg.temp_min, cfg.temp_max);
}

HapticMapper::HapticMapper(MappingConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

bool HapticMapper::gate(std::size_t finger, double force) {
  if (cfg_.hysteresis <= 0.0) return force > cfg_.force_threshold;
  const double half = cfg_.hysteresis / 2.0;
  if (engaged_[finger]) {
    engaged_[finger] = force > cfg_.force_threshold - half;
  } else {
    engaged_[finger] = force > cfg_.force_threshold + half;
  }
  return engaged_[finger];
}

HapticCommand HapticMapper::compute_command(const SensorFrame& frame) {
  HapticCommand cmd;
  try {
    cmd.palm_setpoint = palm_setpoint(frame, cfg_);
    for (std::size_t f = 0; f < kFingers; ++f) {
      const double force = frame.contact_force[f];
      if (!(force >= 0.0)) throw SensorFault("finger " + std::to_string(f) + " force invalid");
      if (gate(f, force)) {
        cmd.motor_current[f] = current_law(force, cfg_);
        cmd.pwm_duty[f] = duty_law(force, cfg_);
      }
    }
  } catch (const SensorFault&) {
    reset_contact_state();
    return safe_command();
  }
  cmd.sequence = ++sequence_;
  return cmd;
}

HapticCommand HapticMapper::safe_command() {
  HapticCommand cmd;
  cmd.palm_setpoint = cfg_.ambient;
  cmd.sequence = ++sequence_;
  return cmd;
}

void HapticMapper::reset_contact_state() { engaged_.fill(false); }

}  // namespace mfe
