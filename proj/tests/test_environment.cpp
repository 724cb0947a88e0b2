#include <cmath>

#include <gtest/gtest.h>

#include "mfe/environment.hpp"
#include "mfe/errors.hpp"
#include "mfe/retarget.hpp"

using namespace mfe;

TEST(Contact, ForceExamples) {
  EXPECT_EQ(contact_force(CompliantCube{}, 0.0), 0.0);
  EXPECT_NEAR(contact_force(CompliantCube{200.0}, 0.010), 2.0, 1e-12);
  const double a = contact_force(CompliantCube{600.0}, 0.004);
  const double b = contact_force(CompliantCube{200.0}, 0.004);
  EXPECT_DOUBLE_EQ(a / b, 3.0);
  EXPECT_THROW(contact_force(CompliantCube{}, -1e-3), DomainError);
}

TEST(Contact, CubeStiffensPastHalfThickness) {
  const CompliantCube cube{200.0, 0.05};
  const double knee = contact_force(cube, 0.025);
  EXPECT_NEAR(contact_force(cube, 0.026) - knee, 10.0 * 200.0 * 0.001, 1e-9);
}

TEST(Contact, SurfaceDistanceFromSize) {
  EXPECT_NEAR(contact_distance(RigidCylinder{0.06}), 0.04, 1e-12);
  EXPECT_NEAR(contact_distance(RigidCylinder{0.08}), 0.03, 1e-12);
  EXPECT_EQ(contact_distance(RigidCylinder{0.5}), 0.0);
}

TEST(Cup, SafeBandNeverSpills) {
  GranularCup cup;
  const double grip = 0.5 * (cup.hold_min(10.0) + cup.spill_onset());
  for (int i = 0; i < 1000; ++i) {
    const double tilt = 10.0 * i / 1000.0;
    cup = cup_step(cup, grip, tilt, 0.01);
  }
  EXPECT_EQ(cup.spilled_mass, 0.0);
  EXPECT_FALSE(cup.dropped);
}

TEST(Cup, NoGripDrops) {
  GranularCup cup;
  cup = cup_step(cup, 0.0, 10.0, 0.01);
  EXPECT_TRUE(cup.dropped);
  EXPECT_EQ(cup.spilled_mass, cup.fill_mass);
}

TEST(Cup, SupportedCupCannotDrop) {
  GranularCup cup;
  cup.supported = true;
  cup = cup_step(cup, 0.0, 0.0, 0.01);
  EXPECT_FALSE(cup.dropped);
}

TEST(Cup, OverSqueezeSpillsAtRate) {
  GranularCup cup;
  const double grip = cup.spill_onset() + 1.0;
  for (int i = 0; i < 100; ++i) cup = cup_step(cup, grip, 0.0, 0.01);
  EXPECT_NEAR(cup.spilled_mass, 5.0, 1e-9);
  EXPECT_NEAR(cup.remaining(), 95.0, 1e-9);
}

TEST(Tilt, ProfileInterpolates) {
  TiltProfile p{{{0.0, 0.0}, {4.0, 0.0}, {6.0, 10.0}}};
  EXPECT_EQ(p.at(-1.0), 0.0);
  EXPECT_EQ(p.at(2.0), 0.0);
  EXPECT_NEAR(p.at(5.0), 5.0, 1e-12);
  EXPECT_EQ(p.at(100.0), 10.0);
  EXPECT_EQ(TiltProfile{}.at(3.0), 0.0);
}

TEST(Policy, NamesRoundTrip) {
  for (auto k : {PolicyKind::CloseUntilForce, PolicyKind::HoldBand, PolicyKind::TemperatureRanker}) {
    EXPECT_EQ(parse_policy_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_policy_kind("squeeze"), ConfigError);
}

TEST(Operator, CloseUntilForceStopsAtSpringInverse) {
  const auto geometry = default_hand_geometry();
  const auto finger = default_follower_hand().fingers[1];
  const CompliantCube cube{200.0, 0.05};
  OperatorPolicy policy;
  policy.target_force = 2.0;
  OperatorState state;
  const double dt = 0.01;
  double penetration = 0.0;
  for (int k = 0; k < 2000 && !state.holding; ++k) {
    RenderedState r;
    r.time = k * dt;
    penetration = std::max(0.0, follower_closure_distance(finger, state.closure) - contact_distance(cube));
    r.force.fill(contact_force(cube, penetration));
    scripted_operator(policy, r, state, geometry, dt);
  }
  ASSERT_TRUE(state.holding);
  const double per_quantum = follower_closure_distance(finger, state.closure) -
                             follower_closure_distance(finger, state.closure - kEncoderQuantumRad);
  EXPECT_GE(penetration, 2.0 / 200.0);
  EXPECT_LE(penetration, 2.0 / 200.0 + per_quantum);
}

TEST(Operator, OutputIsQuantizedAndWithinLimits) {
  const auto geometry = default_hand_geometry();
  OperatorPolicy policy;
  OperatorState state;
  for (int k = 0; k < 1000; ++k) {
    RenderedState r;
    r.time = k * 0.01;
    const auto pose = scripted_operator(policy, r, state, geometry, 0.01);
    ASSERT_TRUE(pose.is_canonical());
    for (std::size_t f = 0; f < kFingers; ++f) {
      const double steps = pose.angles[f] / kEncoderQuantumRad;
      ASSERT_NEAR(steps, std::round(steps), 1e-6);
      ASSERT_TRUE(geometry[f].joint_limits[0].contains(pose.angles[f]));
    }
  }
}

TEST(Operator, HoldBandBacksOffAboveBand) {
  const auto geometry = default_hand_geometry();
  OperatorPolicy policy;
  policy.kind = PolicyKind::HoldBand;
  OperatorState state;
  state.closure = 100 * kEncoderQuantumRad;
  RenderedState r;
  r.force.fill(5.0);
  scripted_operator(policy, r, state, geometry, 0.01);
  EXPECT_NEAR(state.closure, 99 * kEncoderQuantumRad, 1e-12);
  r.force.fill(2.2);
  scripted_operator(policy, r, state, geometry, 0.01);
  EXPECT_NEAR(state.closure, 99 * kEncoderQuantumRad, 1e-12);
}

TEST(Operator, RankerOrdersIdealRendering) {
  const auto geometry = default_hand_geometry();
  OperatorPolicy policy;
  policy.kind = PolicyKind::TemperatureRanker;
  std::vector<double> perceived;
  for (double cup : {4.0, 20.0, 60.0}) {
    OperatorState state;
    const double rendered = std::clamp(cup, 10.0, 55.0);
    for (int k = 0; k < 1000 && !state.settled_temp; ++k) {
      RenderedState r;
      r.time = k * 0.01;
      r.force.fill(3.0);
      r.glove_temp = state.holding ? rendered : kAmbientC;
      scripted_operator(policy, r, state, geometry, 0.01);
    }
    ASSERT_TRUE(state.settled_temp.has_value());
    perceived.push_back(*state.settled_temp);
  }
  EXPECT_EQ(rank_by_temperature(perceived), (std::vector<std::size_t>{2, 1, 0}));
}
