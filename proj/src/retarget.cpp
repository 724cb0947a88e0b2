#include "mfe/retarget.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Geometry>

#include "mfe/errors.hpp"

namespace mfe {

namespace {

constexpr double kInvPhi = 0.61803398874989484820;  // 1/golden ratio
constexpr double kSaturationResidual = 1e-6;        // m

bool at_bound_and_rising(const std::function<double(double)>& cost, double x, double lo,
                         double hi, double tol) {
  const double probe = 4.0 * tol;
  if (hi - lo <= probe) return false;
  if (x <= lo + tol) return cost(lo) < cost(lo + probe);
  if (x >= hi - tol) return cost(hi) < cost(hi - probe);
  return false;
}

}  // namespace

FollowerFinger FollowerFinger::scaled(double factor) const {
  FollowerFinger f = *this;
  for (auto& l : f.link_lengths) l *= factor;
  return f;
}

FollowerHand FollowerHand::scaled(double factor) const {
  FollowerHand h = *this;
  for (auto& f : h.fingers) f = f.scaled(factor);
  return h;
}

FollowerHand default_follower_hand() {
  const auto leader = default_geometry();
  FollowerHand hand;
  FollowerFinger finger;
  for (std::size_t i = 0; i < 3; ++i) finger.link_lengths[i] = 0.9 * leader.link_lengths[i];
  const LeaderCoupling c;
  finger.coupling = {1.0, c.flexion1, c.flexion2};
  finger.closure = leader.joint_limits[0];
  hand.fingers.fill(finger);
  hand.thumb_rotation = leader.joint_limits[kSwingJoint];
  return hand;
}

JointState expand_leader_state(const JointState& state, const HandGeometry& geometry,
                               const LeaderCoupling& coupling) {
  if (state.is_full()) return state;
  if (!state.is_canonical()) throw DomainError("leader state must hold 5 or 20 angles");
  JointState full;
  full.timestamp = state.timestamp;
  full.angles.assign(kFullDof, 0.0);
  for (std::size_t f = 0; f < kFingers; ++f) {
    const auto& g = geometry[f];
    const double q = state.angles[f];
    FingerAngles a{0.0, 0.0, 0.0, 0.0};
    a[g.actuated_joint] = q;
    if (g.actuated_joint == 0) {
      a[1] = coupling.flexion1 * q;
      a[2] = coupling.flexion2 * q;
    }
    for (std::size_t j = 0; j < kJointsPerFinger; ++j) {
      a[j] = std::clamp(a[j], g.joint_limits[j].lower, g.joint_limits[j].upper);
      full.angles[f * kJointsPerFinger + j] = a[j];
    }
  }
  return full;
}

Eigen::Vector3d follower_fingertip(const FollowerFinger& finger, double closure, double rotation) {
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  double cumulative = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    cumulative += finger.coupling[i] * closure;
    p.x() += finger.link_lengths[i] * std::cos(cumulative);
    p.y() += finger.link_lengths[i] * std::sin(cumulative);
  }
  if (rotation != 0.0) p = Eigen::AngleAxisd(rotation, Eigen::Vector3d::UnitY()) * p;
  return p;
}

double follower_closure_distance(const FollowerFinger& finger, double closure) {
  return (follower_fingertip(finger, closure) - follower_fingertip(finger, finger.closure.lower))
      .norm();
}

double golden_section_minimize(const std::function<double(double)>& cost, double lower,
                               double upper, double tolerance) {
  if (!(lower <= upper)) throw DomainError("golden-section bracket is empty");
  double a = lower;
  double b = upper;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = cost(c);
  double fd = cost(d);
  while (b - a > tolerance) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = cost(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = cost(d);
    }
  }
  double best = 0.5 * (a + b);
  double best_cost = cost(best);
  for (double edge : {lower, upper}) {
    const double fe = cost(edge);
    if (fe < best_cost) {
      best = edge;
      best_cost = fe;
    }
  }
  return best;
}

bool RetargetResult::any_saturated() const {
  return std::any_of(saturated.begin(), saturated.end(), [](bool s) { return s; });
}

RetargetResult retarget_pose(const JointState& leader, const HandGeometry& leader_geometry,
                             const FollowerHand& follower, const LeaderCoupling& coupling,
                             double tolerance) {
  const JointState full = expand_leader_state(leader, leader_geometry, coupling);
  validate_joint_state(full, leader_geometry);
  const auto targets = forward_kinematics(leader_geometry, full);

  RetargetResult out;
  for (std::size_t f = 0; f < kFingers; ++f) {
    const auto& finger = follower.fingers[f];
    const Eigen::Vector3d& goal = targets[f].position;
    const auto& lim = finger.closure;

    if (f == 0) {
      const auto& rot = follower.thumb_rotation;
      auto best_closure_for = [&](double r) {
        auto inner = [&](double q) { return (follower_fingertip(finger, q, r) - goal).norm(); };
        return golden_section_minimize(inner, lim.lower, lim.upper, tolerance);
      };
      auto outer = [&](double r) {
        return (follower_fingertip(finger, best_closure_for(r), r) - goal).norm();
      };
      const double r = golden_section_minimize(outer, rot.lower, rot.upper, tolerance);
      const double q = best_closure_for(r);
      auto inner_at_r = [&](double x) { return (follower_fingertip(finger, x, r) - goal).norm(); };
      out.targets[0] = q;
      out.targets[1] = r;
      out.residual[0] = outer(r);
      const bool misfit = out.residual[0] > kSaturationResidual;
      out.saturated[0] = misfit && at_bound_and_rising(inner_at_r, q, lim.lower, lim.upper, tolerance);
      out.saturated[1] = misfit && at_bound_and_rising(outer, r, rot.lower, rot.upper, tolerance);
    } else {
      auto cost = [&](double q) { return (follower_fingertip(finger, q) - goal).norm(); };
      const double q = golden_section_minimize(cost, lim.lower, lim.upper, tolerance);
      out.targets[f + 1] = q;
      out.residual[f] = cost(q);
      out.saturated[f + 1] = out.residual[f] > kSaturationResidual &&
                             at_bound_and_rising(cost, q, lim.lower, lim.upper, tolerance);
    }
  }
  return out;
}

}  // namespace mfe
