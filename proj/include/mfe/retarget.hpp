#pragma once

// Leader (exoskeleton) -> follower (6-DoF robot hand) pose retargeting by
// fingertip position matching.  Every follower finger is a planar 3-link
// chain driven by one closure scalar through fixed coupling ratios; the
// thumb has an extra rotation that swings its flexion plane.

#include <array>
#include <cstddef>
#include <functional>

#include <Eigen/Core>

#include "mfe/kinematics.hpp"

namespace mfe {

inline constexpr std::size_t kFollowerDof = 6;
inline constexpr double kRetargetTolerance = 1e-4;  // rad

struct FollowerFinger {
  std::array<double, 3> link_lengths{};  // m
  std::array<double, 3> coupling{1.0, 1.0, 1.0};  // joint_i = coupling_i * closure
  JointLimit closure{0.0, deg2rad(80.0)};

  FollowerFinger scaled(double factor) const;
};

struct FollowerHand {
  std::array<FollowerFinger, kFingers> fingers;  // thumb first
  JointLimit thumb_rotation{deg2rad(-20.0), deg2rad(20.0)};

  FollowerHand scaled(double factor) const;
};

/// Passive-joint coupling used to expand a canonical (5-angle) leader state.
struct LeaderCoupling {
  double flexion1 = 0.9;
  double flexion2 = 1.1;
};

/// Follower hand matched to the default exoskeleton (0.9x links, same coupling).
FollowerHand default_follower_hand();

/// Expands a canonical state to the full 20-angle layout (passive joints
/// coupled to the actuated one and clamped to limits, swing 0).  Full states
/// are returned unchanged.
JointState expand_leader_state(const JointState& state, const HandGeometry& geometry,
                               const LeaderCoupling& coupling = {});

/// Follower fingertip in its finger base frame for a closure (and rotation for the thumb).
Eigen::Vector3d follower_fingertip(const FollowerFinger& finger, double closure,
                                   double rotation = 0.0);

/// Chord distance travelled by the follower fingertip from its open pose.
double follower_closure_distance(const FollowerFinger& finger, double closure);

/// Bounded golden-section search; returns the best of the final bracket
/// midpoint and both interval bounds.
double golden_section_minimize(const std::function<double(double)>& cost, double lower,
                               double upper, double tolerance = kRetargetTolerance);

struct RetargetResult {
  /// Order: thumb flexion, thumb rotation, index, middle, ring, little.
  std::array<double, kFollowerDof> targets{};
  std::array<bool, kFollowerDof> saturated{};
  std::array<double, kFingers> residual{};  // m, fingertip error per finger

  double closure(std::size_t finger) const { return finger == 0 ? targets[0] : targets[finger + 1]; }
  double thumb_rotation() const { return targets[1]; }
  bool any_saturated() const;
};

RetargetResult retarget_pose(const JointState& leader, const HandGeometry& leader_geometry,
                             const FollowerHand& follower,
                             const LeaderCoupling& coupling = {},
                             double tolerance = kRetargetTolerance);

}  // namespace mfe
