#pragma once

// Follower-side contact environment for the three grasping tasks: shape and
// stiffness discrimination, holding a cup of granules, ranking cup
// temperatures.  Contact is one-dimensional: penetration of each follower
// fingertip beyond the object surface.

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mfe/kinematics.hpp"
#include "mfe/plants.hpp"

namespace mfe {

struct RigidCylinder {
  double diameter = 0.060;           // m
  double contact_stiffness = 5000.0;  // N/m
};

struct CompliantCube {
  double stiffness = 200.0;  // N/m
  double thickness = 0.050;  // m
};

struct GranularCup {
  double diameter = 0.070;               // m
  double stiffness = 300.0;              // N/m, cup wall
  double spill_threshold = 0.008;        // m of deformation
  double hold_base = 0.5;                // N
  double hold_per_deg = 0.15;            // N/deg
  double spill_rate = 5.0;               // g/(N s)
  double fill_mass = 100.0;              // g
  double spilled_mass = 0.0;             // g
  bool dropped = false;
  bool supported = false;                // resting on the table; cannot drop

  double hold_min(double tilt_deg) const { return hold_base + hold_per_deg * tilt_deg; }
  double spill_onset() const { return stiffness * spill_threshold; }  // N
  double remaining() const { return fill_mass - spilled_mass; }
};

struct WaterCup {
  double water_temp = 20.0;          // degC
  double diameter = 0.070;           // m
  double contact_stiffness = 5000.0;  // N/m
};

using TaskObject = std::variant<RigidCylinder, CompliantCube, GranularCup, WaterCup>;

/// Object size seen by the closing hand (m).
double object_size(const TaskObject& object);

/// Temperature of the object surface, ambient for everything but water cups.
double object_temperature(const TaskObject& object, double ambient = kAmbientC);

/// Force for a fingertip penetration (m).  Zero before contact.  Throws
/// DomainError for negative penetration.
double contact_force(const TaskObject& object, double penetration);

/// Advances the cup by dt under a grip force and tilt (deg in [0, 10]).
GranularCup cup_step(GranularCup cup, double grip_force, double tilt_deg, double dt);

/// Piecewise-linear time (s) -> tilt (deg) profile; constant beyond the ends.
struct TiltProfile {
  std::vector<std::pair<double, double>> points;  // (t, deg), t ascending
  double at(double t) const;
};

// ---------------------------------------------------------------------------
// Scripted operator

enum class PolicyKind { CloseUntilForce, HoldBand, TemperatureRanker };

struct OperatorPolicy {
  PolicyKind kind = PolicyKind::CloseUntilForce;
  double target_force = 2.0;  // N, close-until-force and ranker grasp
  double band_low = 2.15;     // N
  double band_high = 2.25;    // N
  double free_speed = deg2rad(20.0);  // rad/s while no force is felt
  double settle_rate = 0.1;   // degC/s, ranker considers the glove settled below this
};

/// Parses "close-until-force", "hold-band", "temperature-ranker"; ConfigError otherwise.
PolicyKind parse_policy_kind(const std::string& name);
std::string to_string(PolicyKind kind);

/// What the operator feels through the glove.
struct RenderedState {
  std::array<double, kFingers> force{};  // N felt at each fingertip
  double glove_temp = kAmbientC;         // degC
  double time = 0.0;                     // s
};

/// Decision state of a scripted operator (one per trial).
struct OperatorState {
  double closure = 0.0;  // rad, commanded actuated angle for every finger
  bool holding = false;
  double last_glove_temp = kAmbientC;
  std::optional<double> grasp_time;    // s, when the grasp target was first reached
  double stable_since = 0.0;           // s, start of the current slow-change window
  std::optional<double> settled_temp;  // ranker: temperature recorded for this trial
  std::optional<double> settled_time;  // s
};

/// One control tick of the operator: reads the rendered state and returns
/// the next canonical leader pose (5 quantized actuated angles).
JointState scripted_operator(const OperatorPolicy& policy, const RenderedState& rendered,
                             OperatorState& state, const HandGeometry& geometry, double dt);

/// Ranker output: indices of `temps` ordered hottest first.
std::vector<std::size_t> rank_by_temperature(const std::vector<double>& temps);

// ---------------------------------------------------------------------------
// Follower hand contact

inline constexpr double kHandAperture = 0.14;  // m, open gap the object sits in

/// Surface distance each fingertip travels before touching `object`.
double contact_distance(const TaskObject& object);

}  // namespace mfe
