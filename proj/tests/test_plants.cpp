#include <cmath>

#include <gtest/gtest.h>

#include "mfe/errors.hpp"
#include "mfe/plants.hpp"

using namespace mfe;

namespace {

// Closed-form underdamped step response of a second-order system.
double second_order_step(double gain, double wn, double zeta, double t) {
  const double wd = wn * std::sqrt(1.0 - zeta * zeta);
  const double e = std::exp(-zeta * wn * t);
  return gain * (1.0 - e * (std::cos(wd * t) + zeta / std::sqrt(1.0 - zeta * zeta) * std::sin(wd * t)));
}

struct StepTrace {
  double peak = 0.0;
  double peak_protrusion = 0.0;
  double crossing = -1.0;
};

StepTrace run_fluidic(double volts, double seconds, double threshold = 0.5) {
  MicrofluidicPlant plant;
  plant.drive_voltage = volts;
  StepTrace tr;
  const int n = static_cast<int>(std::lround(seconds / kPlantDt));
  for (int i = 1; i <= n; ++i) {
    const double before = plant.pressure;
    plant = step_microfluidic(plant, kPlantDt);
    if (tr.crossing < 0 && plant.pressure >= threshold) {
      const double frac = (threshold - before) / (plant.pressure - before);
      tr.crossing = (i - 1 + frac) * kPlantDt;
    }
    tr.peak = std::max(tr.peak, plant.pressure);
    tr.peak_protrusion = std::max(tr.peak_protrusion, plant.protrusion());
  }
  return tr;
}

}  // namespace

TEST(Motor, TorqueIsLinearAndClipped) {
  MotorPlant m;
  EXPECT_NEAR(motor_torque(m, 1750.0), 0.52, 1e-12);
  EXPECT_EQ(motor_torque(m, 0.0), 0.0);
  EXPECT_NEAR(motor_torque(m, 875.0), 0.26, 1e-12);
  EXPECT_NEAR(motor_torque(m, 5000.0), 0.52, 1e-12);
  EXPECT_NEAR(motor_torque(m, -5000.0), -0.52, 1e-12);
}

TEST(Fluidic, StepPeakMatchesMeasurement) {
  const auto tr = run_fluidic(200.0, 2.0);
  EXPECT_NEAR(tr.peak, 2.47, 0.02 * 2.47);
  EXPECT_NEAR(tr.peak_protrusion, 1.65, 0.02 * 1.65);
  EXPECT_NEAR(tr.crossing, 0.1, 0.02);
}

TEST(Fluidic, IntegratorTracksClosedForm) {
  const auto r = MicrofluidicPlant{}.response(200.0);
  MicrofluidicPlant plant;
  plant.drive_voltage = 200.0;
  for (int i = 1; i <= 1500; ++i) {
    plant = step_microfluidic(plant, kPlantDt);
    ASSERT_NEAR(plant.pressure, second_order_step(r.steady_gain, r.natural_frequency, r.damping_ratio, i * kPlantDt),
                2e-4);
  }
}

TEST(Fluidic, ZeroInputStaysAtRest) {
  MicrofluidicPlant plant;
  for (int i = 0; i < 1000; ++i) plant = step_microfluidic(plant, kPlantDt);
  EXPECT_EQ(plant.pressure, 0.0);
  EXPECT_EQ(plant.pressure_rate, 0.0);
}

TEST(Fluidic, ReversedVoltageSucks) {
  const auto pos = run_fluidic(150.0, 2.0);
  MicrofluidicPlant plant;
  plant.drive_voltage = -150.0;
  double low = 0.0;
  for (int i = 0; i < 2000; ++i) {
    plant = step_microfluidic(plant, kPlantDt);
    low = std::min(low, plant.pressure);
  }
  EXPECT_NEAR(low, -pos.peak, 1e-12);
}

TEST(Fluidic, GainAndOvershootOrderings) {
  double prev_peak = 0.0;
  double prev_overshoot = 0.0;
  for (double v : {50.0, 100.0, 150.0, 200.0}) {
    const auto tr = run_fluidic(v, 3.0);
    const double gain = MicrofluidicPlant{}.response(v).steady_gain;
    const double overshoot = tr.peak / gain - 1.0;
    EXPECT_GT(tr.peak, prev_peak) << v;
    EXPECT_GT(overshoot, prev_overshoot) << v;
    prev_peak = tr.peak;
    prev_overshoot = overshoot;
  }
}

TEST(Fluidic, RejectsCoarseSteps) {
  MicrofluidicPlant plant;
  EXPECT_THROW(step_microfluidic(plant, 2e-3), IntegrationError);
  EXPECT_THROW(step_microfluidic(plant, 0.0), IntegrationError);
}

TEST(Thermo, OpenLoopEndpoints) {
  for (auto [v, expected] : {std::pair{5.0, 55.0}, std::pair{-5.0, 10.0}, std::pair{0.0, 24.0}}) {
    ThermoPlant p;
    p.drive_voltage = v;
    for (int i = 0; i < 20000; ++i) p = step_thermo(p, kPlantDt);
    EXPECT_NEAR(p.surface_temp, expected, 1.0) << v;
  }
}

TEST(Thermo, FirstOrderAtOneTimeConstant) {
  ThermoPlant p;
  p.drive_voltage = 5.0;
  const int n = static_cast<int>(std::lround(p.time_constant / kPlantDt));
  for (int i = 0; i < n; ++i) p = step_thermo(p, kPlantDt);
  EXPECT_NEAR(p.surface_temp, 24.0 + (1.0 - std::exp(-1.0)) * 31.0, 1e-4);
}

TEST(Thermo, RejectsCoarseSteps) {
  EXPECT_THROW(step_thermo(ThermoPlant{}, 0.05), IntegrationError);
}

TEST(Pid, ZeroErrorZeroOutput) {
  PidController c;
  EXPECT_EQ(pid_step(c, 30.0, 30.0, kPlantDt), 0.0);
}

TEST(Pid, LargeErrorSaturates) {
  PidController c;
  EXPECT_EQ(pid_step(c, 55.0, 24.0, kPlantDt), 5.0);
  EXPECT_EQ(pid_step(c, 10.0, 24.0, kPlantDt), -5.0);
}

TEST(Pid, IntegralFreezesWhileSaturated) {
  PidController c;
  for (int i = 0; i < 1000; ++i) pid_step(c, 55.0, 24.0, kPlantDt);
  EXPECT_EQ(c.integral, 0.0);
}

TEST(Pid, ClosedLoopSettles) {
  ThermoPlant plant;
  PidController c;
  double settle = -1.0;
  double worst = 0.0;
  for (int i = 1; i <= 15000; ++i) {
    plant.drive_voltage = pid_step(c, 40.0, plant.surface_temp, kPlantDt);
    plant = step_thermo(plant, kPlantDt);
    const double t = i * kPlantDt;
    if (std::abs(plant.surface_temp - 40.0) > 1.0) settle = -1.0;
    else if (settle < 0) settle = t;
    if (t > 2.0) worst = std::max(worst, plant.surface_temp - 40.0);
  }
  EXPECT_GE(settle, 3.0);
  EXPECT_LE(settle, 6.0);
  EXPECT_LT(worst, 2.0);
  EXPECT_NEAR(plant.surface_temp, 40.0, 0.5);
}

TEST(Membrane, AmbientObjectStaysAmbient) {
  auto m = MembranePlant::at_ambient();
  for (int i = 0; i < 1000; ++i) sense_membrane(kAmbientC, m, full_contact(), kPlantDt);
  for (double t : m.temps) EXPECT_EQ(t, kAmbientC);
}

TEST(Membrane, HotObjectFixedPoint) {
  auto m = MembranePlant::at_ambient();
  for (int i = 0; i < 20000; ++i) sense_membrane(60.0, m, full_contact(), kPlantDt);
  for (double t : m.temps) EXPECT_NEAR(t, 60.0, 1e-6);
}

TEST(Membrane, CentralContactAtOneTimeConstant) {
  const MappingConfig cfg;
  auto m = MembranePlant::at_ambient();
  const int n = static_cast<int>(std::lround(m.time_constant / kPlantDt));
  for (int i = 0; i < n; ++i) sense_membrane(60.0, m, central_contact(cfg), kPlantDt);
  const double expected = 24.0 + (1.0 - std::exp(-1.0)) * 36.0;
  EXPECT_NEAR(expected, 46.75, 0.01);
  for (std::size_t i = 0; i < kPalmSensors; ++i) {
    const bool central = std::find(cfg.central_indices.begin(), cfg.central_indices.end(), i) !=
                         cfg.central_indices.end();
    if (central) {
      EXPECT_NEAR(m.temps[i], expected, 1e-3);
    } else {
      EXPECT_EQ(m.temps[i], kAmbientC);
    }
  }
}
