#include "mfe/kinematics.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Geometry>

#include "mfe/errors.hpp"

namespace mfe {

namespace {

const char* const kJointNames[kJointsPerFinger] = {"flexion0", "flexion1", "flexion2", "swing"};

// Planar chain endpoint relative to flexion joint `from` (0..3; 3 = fingertip).
Eigen::Vector2d planar_segment(const LinkageGeometry& geom, const FingerAngles& angles,
                               std::size_t from) {
  Eigen::Vector2d p = Eigen::Vector2d::Zero();
  double cumulative = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    cumulative += angles[i];
    if (i >= from) {
      p += geom.link_lengths[i] * Eigen::Vector2d(std::cos(cumulative), std::sin(cumulative));
    }
  }
  return p;
}

void append_number(std::string& out, double value) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, end);
}

}  // namespace

void LinkageGeometry::validate() const {
  for (std::size_t i = 0; i < link_lengths.size(); ++i) {
    if (!(link_lengths[i] > 0.0) || !std::isfinite(link_lengths[i])) {
      throw DomainError("link " + std::to_string(i) + " length must be > 0");
    }
  }
  if (!(swing_offset >= 0.0) || !std::isfinite(swing_offset)) {
    throw DomainError("swing offset must be >= 0");
  }
  for (std::size_t j = 0; j < kJointsPerFinger; ++j) {
    const auto& lim = joint_limits[j];
    if (!(lim.lower <= lim.upper) || !(lim.lower > -kPi) || !(lim.upper < kPi)) {
      throw DomainError(std::string("joint limit of ") + kJointNames[j] +
                        " must be a non-empty interval inside (-pi, pi)");
    }
  }
  if (actuated_joint >= kJointsPerFinger) {
    throw DomainError("actuated joint index must be in {0,1,2,3}");
  }
}

LinkageGeometry LinkageGeometry::scaled(double factor) const {
  LinkageGeometry g = *this;
  for (auto& l : g.link_lengths) l *= factor;
  g.swing_offset *= factor;
  return g;
}

LinkageGeometry default_geometry() {
  LinkageGeometry g;
  g.link_lengths = {0.062, 0.048, 0.0365};
  g.swing_offset = 0.0;
  g.joint_limits = {{
      {deg2rad(0.0), deg2rad(80.0)},
      {deg2rad(0.0), deg2rad(76.5)},
      {deg2rad(0.0), deg2rad(95.6)},
      {deg2rad(-20.0), deg2rad(20.0)},
  }};
  g.actuated_joint = 0;
  return g;
}

FingerAngles rest_pose() { return {deg2rad(20.0), deg2rad(43.0), deg2rad(53.9), 0.0}; }

HandGeometry default_hand_geometry() {
  HandGeometry hand;
  hand.fill(default_geometry());
  return hand;
}

FingerAngles JointState::finger(std::size_t i) const {
  if (!is_full() || i >= kFingers) {
    throw DomainError("finger() needs a full 20-angle joint state and index < 5");
  }
  FingerAngles a{};
  for (std::size_t j = 0; j < kJointsPerFinger; ++j) a[j] = angles[i * kJointsPerFinger + j];
  return a;
}

void validate_joint_state(const JointState& state, const HandGeometry& geometry) {
  if (state.is_full()) {
    for (std::size_t f = 0; f < kFingers; ++f) check_limits(geometry[f], state.finger(f));
  } else if (state.is_canonical()) {
    for (std::size_t f = 0; f < kFingers; ++f) {
      const auto& g = geometry[f];
      if (!g.joint_limits[g.actuated_joint].contains(state.angles[f])) {
        throw DomainError("finger " + std::to_string(f) + " actuated angle outside its limit");
      }
    }
  } else {
    throw DomainError("joint state must hold 5 or 20 angles, got " +
                      std::to_string(state.angles.size()));
  }
}

void check_limits(const LinkageGeometry& geom, const FingerAngles& angles) {
  for (std::size_t j = 0; j < kJointsPerFinger; ++j) {
    if (!std::isfinite(angles[j]) || !geom.joint_limits[j].contains(angles[j])) {
      std::ostringstream msg;
      msg << "joint " << j << " (" << kJointNames[j] << ") angle " << angles[j]
          << " rad outside [" << geom.joint_limits[j].lower << ", " << geom.joint_limits[j].upper
          << "]";
      throw DomainError(msg.str());
    }
  }
}

FingertipPose forward_kinematics(const LinkageGeometry& geom, const FingerAngles& angles) {
  check_limits(geom, angles);
  const Eigen::Vector2d planar = planar_segment(geom, angles, 0);
  const Eigen::Vector3d in_plane(geom.swing_offset + planar.x(), planar.y(), 0.0);
  const Eigen::AngleAxisd swing(angles[kSwingJoint], Eigen::Vector3d::UnitY());
  return FingertipPose{swing * in_plane};
}

std::array<FingertipPose, kFingers> forward_kinematics(const HandGeometry& hand,
                                                       const JointState& state) {
  if (!state.is_full()) throw DomainError("hand FK needs the full 20-angle joint state");
  std::array<FingertipPose, kFingers> poses;
  for (std::size_t f = 0; f < kFingers; ++f) {
    poses[f] = forward_kinematics(hand[f], state.finger(f));
  }
  return poses;
}

double moment_arm(const LinkageGeometry& geom, const FingerAngles& angles) {
  check_limits(geom, angles);
  double arm = 0.0;
  if (geom.actuated_joint == kSwingJoint) {
    // Swing axis is the y axis: distance is the in-plane x extent.
    arm = std::abs(geom.swing_offset + planar_segment(geom, angles, 0).x());
  } else {
    arm = planar_segment(geom, angles, geom.actuated_joint).norm();
  }
  if (arm < kSingularArm) {
    throw SingularityError("fingertip lies on the actuated joint axis (arm " +
                           std::to_string(arm) + " m)");
  }
  return arm;
}

double fingertip_force(const LinkageGeometry& geom, const FingerAngles& angles, double torque) {
  return torque / moment_arm(geom, angles);
}

namespace {

template <typename Visit>
void for_each_grid_pose(const LinkageGeometry& geom, std::size_t n, Visit&& visit) {
  std::array<std::vector<double>, kJointsPerFinger> axes;
  for (std::size_t j = 0; j < kJointsPerFinger; ++j) {
    const auto& lim = geom.joint_limits[j];
    axes[j].resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      // Pin the last sample to the upper bound so corners are hit exactly.
      axes[j][k] = (k + 1 == n) ? lim.upper
                                : lim.lower + (lim.upper - lim.lower) * static_cast<double>(k) /
                                                  static_cast<double>(n - 1);
    }
  }
  FingerAngles a{};
  for (double a0 : axes[0]) {
    a[0] = a0;
    for (double a1 : axes[1]) {
      a[1] = a1;
      for (double a2 : axes[2]) {
        a[2] = a2;
        for (double a3 : axes[3]) {
          a[3] = a3;
          visit(a);
        }
      }
    }
  }
}

double sweep_arm(const LinkageGeometry& geom, const FingerAngles& a) {
  if (geom.actuated_joint == kSwingJoint) {
    return std::abs(geom.swing_offset + planar_segment(geom, a, 0).x());
  }
  return planar_segment(geom, a, geom.actuated_joint).norm();
}

}  // namespace

ForceRange workspace_force_range(const LinkageGeometry& geom, double torque,
                                 std::size_t grid_resolution) {
  geom.validate();
  if (grid_resolution < 2) throw DomainError("grid resolution must be >= 2 samples per joint");

  ForceRange r;
  r.min_force = std::numeric_limits<double>::infinity();
  r.max_force = -std::numeric_limits<double>::infinity();
  for_each_grid_pose(geom, grid_resolution, [&](const FingerAngles& a) {
    const double arm = sweep_arm(geom, a);
    if (arm < kSweepSingularArm) {
      ++r.poses_skipped;
      return;
    }
    ++r.poses_evaluated;
    const double f = torque / arm;
    if (f < r.min_force) {
      r.min_force = f;
      r.min_pose = a;
    }
    if (f > r.max_force) {
      r.max_force = f;
      r.max_pose = a;
    }
  });
  if (r.poses_evaluated == 0) throw AnalysisError("every workspace grid pose is singular");
  return r;
}

std::vector<WorkspaceSample> workspace_sweep(const LinkageGeometry& geom, double torque,
                                             std::size_t grid_resolution) {
  geom.validate();
  if (grid_resolution < 2) throw DomainError("grid resolution must be >= 2 samples per joint");
  std::vector<WorkspaceSample> out;
  for_each_grid_pose(geom, grid_resolution, [&](const FingerAngles& a) {
    const double arm = sweep_arm(geom, a);
    if (arm >= kSweepSingularArm) out.push_back({a, arm, torque / arm});
  });
  return out;
}

std::string workspace_csv(std::span<const WorkspaceSample> samples) {
  std::string out = "theta0,theta1,theta2,theta3,arm_m,force_N\n";
  for (const auto& s : samples) {
    for (double a : s.angles) {
      append_number(out, a);
      out += ',';
    }
    append_number(out, s.arm);
    out += ',';
    append_number(out, s.force);
    out += '\n';
  }
  return out;
}

double quantize_encoder(double angle) {
  const double steps = angle / kEncoderQuantumRad;
  // Decimal ties such as 0.044 deg are not exact in binary; nudge them outward.
  return std::round(steps + std::copysign(1e-9, steps)) * kEncoderQuantumRad;
}

}  // namespace mfe
