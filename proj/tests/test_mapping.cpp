#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "mfe/errors.hpp"
#include "mfe/mapping.hpp"

using namespace mfe;

TEST(Mapping, CurrentEndpointIsExact) {
  const MappingConfig cfg;
  EXPECT_EQ(force_to_current(6000.0, cfg), 1750.0);
  EXPECT_EQ(force_to_current(cfg.force_threshold, cfg), 0.0);
  EXPECT_NEAR(force_to_current(100.0, cfg), 175000.0 / 6000.0, 1e-12);
  EXPECT_EQ(force_to_current(1e9, cfg), 1750.0);
}

TEST(Mapping, DutyExamples) {
  const MappingConfig cfg;
  EXPECT_EQ(pressure_duty(0.0, cfg), 0.0);
  EXPECT_NEAR(pressure_duty(2.47, cfg), 1.0, 1e-12);
  EXPECT_NEAR(pressure_duty(1.97, cfg), 0.5, 1e-12);
  EXPECT_EQ(pressure_duty(50.0, cfg), 1.0);
}

TEST(Mapping, NegativeForceIsRejected) {
  const MappingConfig cfg;
  EXPECT_THROW(force_to_current(-0.1, cfg), DomainError);
  EXPECT_THROW(pressure_duty(-0.1, cfg), DomainError);
  EXPECT_THROW(pressure_duty(std::numeric_limits<double>::quiet_NaN(), cfg), DomainError);
}

TEST(Mapping, LawsAgreeWithReferenceOnRandomInputs) {
  const MappingConfig cfg;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> small(0.0, 5.0);
  std::uniform_real_distribution<double> large(0.0, 10000.0);
  for (int i = 0; i < 100000; ++i) {
    const double f = (i % 2) ? small(rng) : large(rng);
    const double current = force_to_current(f, cfg);
    const double duty = pressure_duty(f, cfg);
    ASSERT_GE(current, 0.0);
    ASSERT_LE(current, cfg.current_limit);
    ASSERT_GE(duty, 0.0);
    ASSERT_LE(duty, 1.0);
    if (f <= 1.47) {
      ASSERT_EQ(current, 0.0);
      ASSERT_EQ(duty, 0.0);
    } else {
      const double ref_i = std::min(f * 1750.0 / 6000.0, 1750.0);
      const double ref_d = std::min((f - 1.47), 1.0);
      ASSERT_NEAR(current, ref_i, 1e-9 * std::max(1.0, ref_i));
      ASSERT_NEAR(duty, ref_d, 1e-12);
    }
  }
}

TEST(Mapping, CentralIndicesAreMiddleColumns) {
  const auto idx = default_central_indices();
  ASSERT_EQ(idx.size(), 9u);
  for (auto i : idx) {
    EXPECT_GE(i % kPalmCols, 3u);
    EXPECT_LE(i % kPalmCols, 5u);
  }
}

TEST(Mapping, PalmSetpointIgnoresPeriphery) {
  const MappingConfig cfg;
  SensorFrame frame = SensorFrame::ambient(20.0);
  for (auto i : cfg.central_indices) frame.palm_temps[i] = 30.0;
  EXPECT_DOUBLE_EQ(palm_setpoint(frame, cfg), 30.0);
}

TEST(Mapping, PalmSetpointClamps) {
  const MappingConfig cfg;
  SensorFrame hot = SensorFrame::ambient(24.0);
  SensorFrame cold = SensorFrame::ambient(24.0);
  for (auto i : cfg.central_indices) {
    hot.palm_temps[i] = 60.0;
    cold.palm_temps[i] = 4.0;
  }
  EXPECT_EQ(palm_setpoint(hot, cfg), 55.0);
  EXPECT_EQ(palm_setpoint(cold, cfg), 10.0);
}

TEST(Mapping, PalmSetpointClampIsExactOnRandomFrames) {
  const MappingConfig cfg;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> temp(-20.0, 90.0);
  for (int i = 0; i < 20000; ++i) {
    SensorFrame frame;
    for (auto& t : frame.palm_temps) t = temp(rng);
    double sum = 0.0;
    for (auto k : cfg.central_indices) sum += frame.palm_temps[k];
    const double expected = std::clamp(sum / 9.0, 10.0, 55.0);
    const double got = palm_setpoint(frame, cfg);
    ASSERT_GE(got, 10.0);
    ASSERT_LE(got, 55.0);
    ASSERT_NEAR(got, expected, 1e-12);
  }
}

TEST(Mapping, NanSensorIsAFault) {
  const MappingConfig cfg;
  SensorFrame frame = SensorFrame::ambient();
  frame.palm_temps[cfg.central_indices[4]] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(palm_setpoint(frame, cfg), SensorFault);
}

TEST(Mapping, CommandAtRestIsAmbient) {
  HapticMapper mapper;
  const auto cmd = mapper.compute_command(SensorFrame::ambient());
  EXPECT_TRUE(cmd.is_safe());
  EXPECT_EQ(cmd.sequence, 1u);
}

TEST(Mapping, FingersAreIndependent) {
  HapticMapper mapper;
  SensorFrame frame = SensorFrame::ambient();
  frame.contact_force[2] = 2.47;
  const auto cmd = mapper.compute_command(frame);
  for (std::size_t f = 0; f < kFingers; ++f) {
    if (f == 2) {
      EXPECT_NEAR(cmd.motor_current[f], 0.72, 0.005);
      EXPECT_NEAR(cmd.pwm_duty[f], 1.0, 1e-12);
    } else {
      EXPECT_EQ(cmd.motor_current[f], 0.0);
      EXPECT_EQ(cmd.pwm_duty[f], 0.0);
    }
  }
}

TEST(Mapping, SaturatedCommand) {
  HapticMapper mapper;
  SensorFrame frame = SensorFrame::ambient();
  frame.contact_force.fill(6000.0);
  const auto cmd = mapper.compute_command(frame);
  for (std::size_t f = 0; f < kFingers; ++f) {
    EXPECT_EQ(cmd.motor_current[f], 1750.0);
    EXPECT_EQ(cmd.pwm_duty[f], 1.0);
  }
}

TEST(Mapping, FaultEmitsSafeCommand) {
  HapticMapper mapper;
  SensorFrame frame = SensorFrame::ambient();
  frame.contact_force.fill(5.0);
  frame.contact_force[3] = -1.0;
  const auto cmd = mapper.compute_command(frame);
  EXPECT_TRUE(cmd.is_safe());
  frame.contact_force[3] = 5.0;
  frame.palm_temps[default_central_indices()[0]] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_TRUE(mapper.compute_command(frame).is_safe());
}

TEST(Mapping, SequenceIncrementsOnEveryCommand) {
  HapticMapper mapper;
  EXPECT_EQ(mapper.compute_command(SensorFrame::ambient()).sequence, 1u);
  EXPECT_EQ(mapper.safe_command().sequence, 2u);
  EXPECT_EQ(mapper.compute_command(SensorFrame::ambient()).sequence, 3u);
}

TEST(Mapping, HysteresisLatchesAroundThreshold) {
  MappingConfig cfg;
  cfg.hysteresis = 0.2;
  HapticMapper mapper(cfg);
  SensorFrame frame = SensorFrame::ambient();
  auto current_at = [&](double f) {
    frame.contact_force[0] = f;
    return mapper.compute_command(frame).motor_current[0];
  };
  EXPECT_EQ(current_at(1.50), 0.0);           // below the upper edge, still off
  EXPECT_GT(current_at(1.60), 0.0);           // crosses 1.57, engages
  EXPECT_NEAR(current_at(1.40), 1.40 * 1750.0 / 6000.0, 1e-12);  // above 1.37, stays on
  EXPECT_EQ(current_at(1.30), 0.0);           // below the lower edge, releases
  EXPECT_EQ(current_at(1.50), 0.0);
  EXPECT_GT(current_at(1.60), 0.0);
  mapper.reset_contact_state();
  EXPECT_EQ(current_at(1.50), 0.0);
}

TEST(Mapping, ConfigValidation) {
  MappingConfig cfg;
  cfg.temp_min = 60.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = MappingConfig{};
  cfg.central_indices = {27};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = MappingConfig{};
  cfg.current_limit = 0.0;
  EXPECT_THROW(HapticMapper{cfg}, ConfigError);
}
