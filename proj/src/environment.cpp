#include "mfe/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mfe/errors.hpp"

namespace mfe {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kSettleWindow = 2.0;  // s of slow change before the ranker commits
constexpr double kMinDwell = 3.0;      // s after grasping before the ranker may commit

double mean(const std::array<double, kFingers>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double snap_to_encoder(double angle, const JointLimit& lim) {
  double q = quantize_encoder(std::clamp(angle, lim.lower, lim.upper));
  if (q > lim.upper) q -= kEncoderQuantumRad;
  if (q < lim.lower) q += kEncoderQuantumRad;
  return q;
}

}  // namespace

double object_size(const TaskObject& object) {
  return std::visit(overloaded{
                        [](const RigidCylinder& o) { return o.diameter; },
                        [](const CompliantCube& o) { return o.thickness; },
                        [](const GranularCup& o) { return o.diameter; },
                        [](const WaterCup& o) { return o.diameter; },
                    },
                    object);
}

double object_temperature(const TaskObject& object, double ambient) {
  if (const auto* cup = std::get_if<WaterCup>(&object)) return cup->water_temp;
  return ambient;
}

double contact_force(const TaskObject& object, double penetration) {
  if (!(penetration >= 0.0)) throw DomainError("penetration must be >= 0");
  return std::visit(
      overloaded{
          [&](const RigidCylinder& o) { return o.contact_stiffness * penetration; },
          [&](const CompliantCube& o) {
            // Linear to half the thickness, ten times stiffer beyond.
            const double knee = 0.5 * o.thickness;
            if (penetration <= knee) return o.stiffness * penetration;
            return o.stiffness * knee + 10.0 * o.stiffness * (penetration - knee);
          },
          [&](const GranularCup& o) { return o.stiffness * penetration; },
          [&](const WaterCup& o) { return o.contact_stiffness * penetration; },
      },
      object);
}

GranularCup cup_step(GranularCup cup, double grip_force, double tilt_deg, double dt) {
  tilt_deg = std::clamp(tilt_deg, 0.0, 10.0);
  if (cup.dropped) return cup;
  if (!cup.supported && grip_force < cup.hold_min(tilt_deg)) {
    cup.dropped = true;
    cup.spilled_mass = cup.fill_mass;
    return cup;
  }
  const double deformation = grip_force / cup.stiffness;
  if (deformation > cup.spill_threshold) {
    const double excess = grip_force - cup.spill_onset();
    cup.spilled_mass = std::min(cup.fill_mass, cup.spilled_mass + cup.spill_rate * excess * dt);
  }
  return cup;
}

double TiltProfile::at(double t) const {
  if (points.empty()) return 0.0;
  if (t <= points.front().first) return points.front().second;
  for (std::size_t i = 1; i < points.size(); ++i) {
    const auto& [t1, v1] = points[i];
    if (t <= t1) {
      const auto& [t0, v0] = points[i - 1];
      if (t1 == t0) return v1;
      return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
    }
  }
  return points.back().second;
}

PolicyKind parse_policy_kind(const std::string& name) {
  if (name == "close-until-force") return PolicyKind::CloseUntilForce;
  if (name == "hold-band") return PolicyKind::HoldBand;
  if (name == "temperature-ranker") return PolicyKind::TemperatureRanker;
  throw ConfigError("unknown operator policy '" + name + "'");
}

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::CloseUntilForce:
      return "close-until-force";
    case PolicyKind::HoldBand:
      return "hold-band";
    case PolicyKind::TemperatureRanker:
      return "temperature-ranker";
  }
  return "unknown";
}

JointState scripted_operator(const OperatorPolicy& policy, const RenderedState& rendered,
                             OperatorState& state, const HandGeometry& geometry, double dt) {
  const auto& lim = geometry[1].joint_limits[geometry[1].actuated_joint];
  const double felt = mean(rendered.force);
  double closure = state.closure;
  const double free_step = policy.free_speed * dt;

  auto approach = [&](double target) {
    if (state.holding) return;
    if (felt >= target) {
      state.holding = true;
    } else if (felt > 0.0) {
      closure += kEncoderQuantumRad;
    } else {
      closure += free_step;
    }
  };

  switch (policy.kind) {
    case PolicyKind::CloseUntilForce:
      approach(policy.target_force);
      break;
    case PolicyKind::HoldBand:
      if (felt < policy.band_low) {
        closure += felt > 0.0 ? kEncoderQuantumRad : free_step;
      } else if (felt > policy.band_high) {
        closure -= kEncoderQuantumRad;
      }
      break;
    case PolicyKind::TemperatureRanker:
      approach(policy.target_force);
      if (state.holding && !state.settled_temp) {
        if (!state.grasp_time) {
          state.grasp_time = rendered.time;
          state.stable_since = rendered.time;
        }
        const double rate = std::abs(rendered.glove_temp - state.last_glove_temp) / dt;
        if (rate > policy.settle_rate) {
          state.stable_since = rendered.time;
        } else if (rendered.time - state.stable_since >= kSettleWindow &&
                   rendered.time - *state.grasp_time >= kMinDwell) {
          state.settled_temp = rendered.glove_temp;
          state.settled_time = rendered.time;
        }
      }
      state.last_glove_temp = rendered.glove_temp;
      break;
  }

  state.closure = snap_to_encoder(closure, lim);
  JointState out;
  out.timestamp = rendered.time;
  out.angles.assign(kFingers, 0.0);
  for (std::size_t f = 0; f < kFingers; ++f) {
    const auto& fl = geometry[f].joint_limits[geometry[f].actuated_joint];
    out.angles[f] = snap_to_encoder(state.closure, fl);
  }
  return out;
}

std::vector<std::size_t> rank_by_temperature(const std::vector<double>& temps) {
  std::vector<std::size_t> order(temps.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return temps[a] > temps[b]; });
  return order;
}

double contact_distance(const TaskObject& object) {
  return std::max(0.0, 0.5 * (kHandAperture - object_size(object)));
}

}  // namespace mfe
