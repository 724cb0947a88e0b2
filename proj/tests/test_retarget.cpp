#include <cmath>
#include <complex>

#include <gtest/gtest.h>

#include "mfe/errors.hpp"
#include "mfe/retarget.hpp"

using namespace mfe;

namespace {

JointState canonical(double angle) {
  JointState s;
  s.angles.assign(kFingers, angle);
  return s;
}

FollowerHand follower_with_links(const std::array<double, 3>& links) {
  FollowerHand hand = default_follower_hand();
  for (auto& f : hand.fingers) f.link_lengths = links;
  return hand;
}

std::complex<double> chain(const std::array<double, 3>& links, const std::array<double, 3>& q) {
  std::complex<double> z{};
  double c = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    c += q[i];
    z += links[i] * std::polar(1.0, c);
  }
  return z;
}

}  // namespace

TEST(Retarget, ExpansionAppliesCoupling) {
  const auto hand = default_hand_geometry();
  const auto full = expand_leader_state(canonical(deg2rad(30)), hand);
  ASSERT_TRUE(full.is_full());
  EXPECT_DOUBLE_EQ(full.angles[0], deg2rad(30));
  EXPECT_DOUBLE_EQ(full.angles[1], 0.9 * deg2rad(30));
  EXPECT_DOUBLE_EQ(full.angles[2], 1.1 * deg2rad(30));
  EXPECT_DOUBLE_EQ(full.angles[3], 0.0);
  EXPECT_NO_THROW(validate_joint_state(full, hand));
}

TEST(Retarget, ExpansionClampsPassiveJoints) {
  const auto hand = default_hand_geometry();
  const double q = hand[0].joint_limits[0].upper;
  const auto full = expand_leader_state(canonical(q), hand);
  EXPECT_LE(full.angles[1], hand[0].joint_limits[1].upper);
  EXPECT_LE(full.angles[2], hand[0].joint_limits[2].upper);
}

TEST(Retarget, OpenLeaderGivesOpenFollower) {
  const auto hand = default_hand_geometry();
  const auto follower = default_follower_hand();
  const auto r = retarget_pose(canonical(0.0), hand, follower);
  EXPECT_NEAR(r.closure(0), follower.fingers[0].closure.lower, 1e-4);
  for (std::size_t f = 1; f < kFingers; ++f) {
    EXPECT_NEAR(r.closure(f), follower.fingers[f].closure.lower, 1e-4);
  }
  EXPECT_NEAR(r.thumb_rotation(), 0.0, 1e-3);
}

TEST(Retarget, IdenticalModelsReproduceLeaderAngles) {
  const auto hand = default_hand_geometry();
  const auto follower = follower_with_links(hand[0].link_lengths);
  for (double deg : {5.0, 20.0, 45.0, 60.0}) {
    const auto r = retarget_pose(canonical(deg2rad(deg)), hand, follower);
    for (std::size_t f = 0; f < kFingers; ++f) {
      EXPECT_NEAR(r.closure(f), deg2rad(deg), 1e-3) << "finger " << f << " at " << deg;
      EXPECT_LT(r.residual[f], 1e-4);
    }
    EXPECT_FALSE(r.any_saturated());
  }
}

TEST(Retarget, ScaledFollowerMatchesExhaustiveScan) {
  const auto hand = default_hand_geometry();
  const auto& g = hand[1];
  std::array<double, 3> small{};
  for (std::size_t i = 0; i < 3; ++i) small[i] = 0.8 * g.link_lengths[i];
  const auto follower = follower_with_links(small);
  const double q = deg2rad(45.0);

  const auto goal = chain(g.link_lengths, {q, 0.9 * q, 1.1 * q});
  const auto& lim = follower.fingers[1].closure;
  double best = lim.lower;
  double best_cost = 1e300;
  const int n = 10000;
  for (int i = 0; i <= n; ++i) {
    const double c = lim.lower + (lim.upper - lim.lower) * i / n;
    const double cost = std::abs(chain(small, {c, 0.9 * c, 1.1 * c}) - goal);
    if (cost < best_cost) {
      best_cost = cost;
      best = c;
    }
  }
  const auto r = retarget_pose(canonical(q), hand, follower);
  for (std::size_t f = 1; f < kFingers; ++f) EXPECT_NEAR(r.closure(f), best, 2e-4);
}

TEST(Retarget, GoldenSectionFindsParabolaMinimum) {
  const double x = golden_section_minimize([](double v) { return (v - 0.3) * (v - 0.3); }, -1.0, 2.0, 1e-8);
  EXPECT_NEAR(x, 0.3, 1e-7);
  EXPECT_EQ(golden_section_minimize([](double v) { return v; }, 0.0, 1.0), 0.0);
  EXPECT_EQ(golden_section_minimize([](double v) { return -v; }, 0.0, 1.0), 1.0);
  EXPECT_THROW(golden_section_minimize([](double v) { return v; }, 1.0, 0.0), DomainError);
}

TEST(Retarget, UnreachableTargetSaturates) {
  const auto hand = default_hand_geometry();
  auto follower = default_follower_hand();
  for (auto& f : follower.fingers) f.closure.upper = deg2rad(20.0);
  const auto r = retarget_pose(canonical(deg2rad(70.0)), hand, follower);
  for (std::size_t f = 1; f < kFingers; ++f) {
    EXPECT_NEAR(r.closure(f), deg2rad(20.0), 1e-9);
    EXPECT_TRUE(r.saturated[f + 1]);
  }
  EXPECT_TRUE(r.any_saturated());
}

TEST(Retarget, ClosureDistanceGrowsWithClosure) {
  const auto finger = default_follower_hand().fingers[1];
  EXPECT_EQ(follower_closure_distance(finger, finger.closure.lower), 0.0);
  double prev = 0.0;
  // Past about 70 deg the coupled chain curls back toward the palm.
  for (int deg = 2; deg <= 70; deg += 2) {
    const double d = follower_closure_distance(finger, deg2rad(deg));
    EXPECT_GT(d, prev);
    prev = d;
  }
}

TEST(Retarget, RejectsMalformedLeaderState) {
  JointState s;
  s.angles.assign(3, 0.0);
  EXPECT_THROW(retarget_pose(s, default_hand_geometry(), default_follower_hand()), DomainError);
}
