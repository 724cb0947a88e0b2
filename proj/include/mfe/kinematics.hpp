#pragma once

// Finger linkage kinematics for the exoskeleton: three flexion/extension
// joints in one plane plus a lateral swing joint that rotates that plane.
//
// Frame convention (finger base frame):
//   x  along the straight finger
//   y  flexion direction (towards the palm)
//   z  lateral
// Flexion joints rotate about z; the swing joint rotates the whole flexion
// plane about y and sits swing_offset behind the first flexion joint.

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace mfe {

inline constexpr double kPi = 3.14159265358979323846;

constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

inline constexpr std::size_t kFingers = 5;
inline constexpr std::size_t kJointsPerFinger = 4;
inline constexpr std::size_t kFullDof = kFingers * kJointsPerFinger;

/// Joint index of the lateral swing joint inside a finger's angle block.
inline constexpr std::size_t kSwingJoint = 3;

/// Encoder resolution of the joint Hall sensors, degrees.
inline constexpr double kEncoderQuantumDeg = 0.088;
inline constexpr double kEncoderQuantumRad = deg2rad(kEncoderQuantumDeg);

/// Poses whose moment arm is below this are singular for force transmission.
inline constexpr double kSingularArm = 1e-6;

struct JointLimit {
  double lower = 0.0;  // rad
  double upper = 0.0;  // rad

  bool contains(double angle) const { return angle >= lower && angle <= upper; }
};

/// Angles of one finger: three flexion joints then the swing joint (rad).
using FingerAngles = std::array<double, kJointsPerFinger>;

struct LinkageGeometry {
  std::array<double, 3> link_lengths{};  // m
  double swing_offset = 0.0;             // m
  std::array<JointLimit, kJointsPerFinger> joint_limits{};
  std::size_t actuated_joint = 0;

  /// Throws DomainError describing the first violated invariant.
  void validate() const;

  double reach() const { return link_lengths[0] + link_lengths[1] + link_lengths[2] + swing_offset; }

  /// Same geometry with every length multiplied by `factor`.
  LinkageGeometry scaled(double factor) const;
};

/// Calibrated default exoskeleton finger.
LinkageGeometry default_geometry();

/// Resting pose of the calibrated default finger (where 0.52 Nm gives ~4.5 N).
FingerAngles rest_pose();

/// Hand = one geometry per finger, thumb first.
using HandGeometry = std::array<LinkageGeometry, kFingers>;
HandGeometry default_hand_geometry();

/// Timestamped joint angles for a hand.  Canonical: one actuated angle per
/// finger (5 entries).  Full: four angles per finger (20 entries).
struct JointState {
  double timestamp = 0.0;  // s
  std::vector<double> angles;

  bool is_full() const { return angles.size() == kFullDof; }
  bool is_canonical() const { return angles.size() == kFingers; }

  /// Angles of finger `i`; only valid for the full variant.
  FingerAngles finger(std::size_t i) const;
};

/// Checks the size of `state` and that every angle is inside the limits.
void validate_joint_state(const JointState& state, const HandGeometry& geometry);

struct FingertipPose {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();  // m, finger base frame
};

/// Throws DomainError naming the joint when an angle is outside its limit.
void check_limits(const LinkageGeometry& geom, const FingerAngles& angles);

FingertipPose forward_kinematics(const LinkageGeometry& geom, const FingerAngles& angles);

/// Per-finger FK of a full 20-angle state.
std::array<FingertipPose, kFingers> forward_kinematics(const HandGeometry& hand,
                                                       const JointState& state);

/// Perpendicular distance from the actuated joint axis to the fingertip,
/// measured in the flexion plane.  Throws SingularityError below kSingularArm.
double moment_arm(const LinkageGeometry& geom, const FingerAngles& angles);

/// Fingertip force produced by `torque` (Nm) on the actuated joint.
double fingertip_force(const LinkageGeometry& geom, const FingerAngles& angles, double torque);

struct ForceRange {
  double min_force = 0.0;  // N
  double max_force = 0.0;  // N
  FingerAngles min_pose{};
  FingerAngles max_pose{};
  std::size_t poses_evaluated = 0;
  std::size_t poses_skipped = 0;
};

inline constexpr std::size_t kDefaultWorkspaceGrid = 25;
/// Arms below this are skipped by the workspace sweep.
inline constexpr double kSweepSingularArm = 1e-3;

/// Min/max fingertip force over a uniform grid of the joint-limit box
/// (grid_resolution samples per joint, endpoints included).
ForceRange workspace_force_range(const LinkageGeometry& geom, double torque,
                                 std::size_t grid_resolution = kDefaultWorkspaceGrid);

struct WorkspaceSample {
  FingerAngles angles{};
  double arm = 0.0;    // m
  double force = 0.0;  // N
};

/// Every non-singular grid pose with its arm and force.
std::vector<WorkspaceSample> workspace_sweep(const LinkageGeometry& geom, double torque,
                                             std::size_t grid_resolution = kDefaultWorkspaceGrid);

/// CSV with header `theta0,theta1,theta2,theta3,arm_m,force_N` (angles in rad).
std::string workspace_csv(std::span<const WorkspaceSample> samples);

/// Rounds to the nearest encoder step (0.088 deg), ties away from zero.
double quantize_encoder(double angle);

}  // namespace mfe
