#pragma once

// Scenario definitions and INI-style configuration loading for geometry,
// mapping parameters and scenarios.

#include <optional>
#include <string>
#include <vector>

#include "mfe/environment.hpp"
#include "mfe/mapping.hpp"
#include "mfe/protocol.hpp"
#include "mfe/retarget.hpp"

namespace mfe {

enum class PalmContact { Full, Central, None };

struct Trial {
  TaskObject object = CompliantCube{};
  double duration = 8.0;  // s
  double release = 0.5;   // s at the start with the hand opening and no object
};

struct Scenario {
  std::string name = "unnamed";
  std::string task = "custom";  // shape | stiffness | cup | thermal | custom
  OperatorPolicy policy;
  bool force_feedback = true;  // false: the operator model feels no force
  PalmContact palm_contact = PalmContact::Full;
  TiltProfile tilt;  // trial-relative time
  std::vector<Trial> trials;
  LinkModel link;

  double total_duration() const;
  /// Index of the trial running at time t (the last trial extends forever).
  std::size_t trial_at(double t) const;
  double trial_start(std::size_t index) const;
  void validate() const;
};

/// Parses the INI geometry section ([geometry] or [geometry.fingerN]).
HandGeometry load_hand_geometry(const std::string& path);
MappingConfig load_mapping_config(const std::string& path);
Scenario load_scenario(const std::string& path);

/// Same parsers over in-memory text (used by tests and the Python module).
HandGeometry parse_hand_geometry(const std::string& text);
MappingConfig parse_mapping_config(const std::string& text);
Scenario parse_scenario(const std::string& text);

/// Built-in deterministic analogs of the three user-study tasks.
Scenario builtin_shape_scenario();         // 60 mm vs 80 mm cylinders
Scenario builtin_stiffness_scenario();     // soft vs metal-like cube, close to 3 N
Scenario builtin_cup_scenario(bool force_feedback = true);
Scenario builtin_thermal_scenario();       // 20, 60, 4 degC water cups

/// Built-in scenario by name ("task1-shape", ...); nullopt if unknown.
std::optional<Scenario> builtin_scenario(const std::string& name);
std::vector<std::string> builtin_scenario_names();

/// A path to an INI file, or a built-in name.
Scenario resolve_scenario(const std::string& name_or_path);

std::string describe(const TaskObject& object);

}  // namespace mfe
