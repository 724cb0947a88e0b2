#include "mfe/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "mfe/errors.hpp"

namespace mfe {

namespace pt = boost::property_tree;

namespace {

pt::ptree read_ini_text(const std::string& text) {
  std::istringstream in(text);
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return tree;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Accepts plain numbers and "a/b" ratios.
double parse_number(std::string s, const std::string& key) {
  boost::algorithm::trim(s);
  try {
    const auto slash = s.find('/');
    if (slash != std::string::npos) {
      return std::stod(s.substr(0, slash)) / std::stod(s.substr(slash + 1));
    }
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': cannot parse number '" + s + "'");
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> parts;
  boost::algorithm::split(parts, s, boost::is_any_of(","));
  for (auto& p : parts) boost::algorithm::trim(p);
  parts.erase(std::remove(parts.begin(), parts.end(), std::string{}), parts.end());
  return parts;
}

std::pair<double, double> parse_pair(const std::string& s, const std::string& key) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw ConfigError("key '" + key + "': expected a:b, got " + s);
  return {parse_number(s.substr(0, colon), key), parse_number(s.substr(colon + 1), key)};
}

double get_number(const pt::ptree& section, const std::string& key, double fallback) {
  const auto v = section.get_optional<std::string>(key);
  return v ? parse_number(*v, key) : fallback;
}

bool parse_bool(std::string s, const std::string& key) {
  boost::algorithm::to_lower(s);
  boost::algorithm::trim(s);
  if (s == "on" || s == "true" || s == "yes" || s == "1") return true;
  if (s == "off" || s == "false" || s == "no" || s == "0") return false;
  throw ConfigError("key '" + key + "': expected on/off, got " + s);
}

void apply_geometry(const pt::ptree& sec, LinkageGeometry& g) {
  if (auto v = sec.get_optional<std::string>("link_lengths_m")) {
    const auto parts = split_list(*v);
    if (parts.size() != 3) throw ConfigError("link_lengths_m needs 3 values");
    for (std::size_t i = 0; i < 3; ++i) g.link_lengths[i] = parse_number(parts[i], "link_lengths_m");
  }
  g.swing_offset = get_number(sec, "swing_offset_m", g.swing_offset);
  if (auto v = sec.get_optional<std::string>("joint_limits_deg")) {
    const auto parts = split_list(*v);
    if (parts.size() != kJointsPerFinger) throw ConfigError("joint_limits_deg needs 4 lo:hi pairs");
    for (std::size_t j = 0; j < kJointsPerFinger; ++j) {
      const auto [lo, hi] = parse_pair(parts[j], "joint_limits_deg");
      g.joint_limits[j] = {deg2rad(lo), deg2rad(hi)};
    }
  }
  if (auto v = sec.get_optional<std::string>("actuated_joint")) {
    const double a = parse_number(*v, "actuated_joint");
    if (a < 0 || a > 3 || a != std::floor(a)) throw ConfigError("actuated_joint must be 0..3");
    g.actuated_joint = static_cast<std::size_t>(a);
  }
}

HandGeometry geometry_from_tree(const pt::ptree& tree) {
  HandGeometry hand = default_hand_geometry();
  if (auto sec = tree.get_child_optional("geometry")) {
    for (auto& g : hand) apply_geometry(*sec, g);
  }
  for (std::size_t f = 0; f < kFingers; ++f) {
    if (auto sec = tree.get_child_optional("geometry_finger" + std::to_string(f))) {
      apply_geometry(*sec, hand[f]);
    }
  }
  try {
    for (const auto& g : hand) g.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid geometry: ") + e.what());
  }
  return hand;
}

MappingConfig mapping_from_tree(const pt::ptree& tree) {
  MappingConfig cfg;
  if (auto sec = tree.get_child_optional("mapping")) {
    cfg.force_threshold = get_number(*sec, "force_threshold_N", cfg.force_threshold);
    cfg.current_per_force = get_number(*sec, "current_per_force_mA", cfg.current_per_force);
    cfg.pressure_gain = get_number(*sec, "pressure_gain", cfg.pressure_gain);
    cfg.temp_min = get_number(*sec, "temp_min_C", cfg.temp_min);
    cfg.temp_max = get_number(*sec, "temp_max_C", cfg.temp_max);
    cfg.current_limit = get_number(*sec, "current_limit_mA", cfg.current_limit);
    cfg.ambient = get_number(*sec, "ambient_C", cfg.ambient);
    cfg.hysteresis = get_number(*sec, "hysteresis_N", cfg.hysteresis);
    if (auto v = sec->get_optional<std::string>("central_indices")) {
      cfg.central_indices.clear();
      for (const auto& p : split_list(*v)) {
        const double i = parse_number(p, "central_indices");
        if (i < 0 || i != std::floor(i)) throw ConfigError("central_indices must be integers");
        cfg.central_indices.push_back(static_cast<std::size_t>(i));
      }
    }
  }
  cfg.validate();
  return cfg;
}

TaskObject object_from_section(const pt::ptree& sec, const std::string& name) {
  const auto type = sec.get_optional<std::string>("object");
  if (!type) throw ConfigError("[" + name + "] needs an 'object' key");
  if (*type == "cylinder") {
    RigidCylinder o;
    o.diameter = get_number(sec, "diameter_m", o.diameter);
    o.contact_stiffness = get_number(sec, "stiffness_N_m", o.contact_stiffness);
    if (!(o.diameter > 0.0)) throw ConfigError("cylinder diameter must be > 0");
    return o;
  }
  if (*type == "cube") {
    CompliantCube o;
    o.stiffness = get_number(sec, "stiffness_N_m", o.stiffness);
    o.thickness = get_number(sec, "thickness_m", o.thickness);
    if (!(o.stiffness > 0.0)) throw ConfigError("cube stiffness must be > 0");
    return o;
  }
  if (*type == "granular-cup") {
    GranularCup o;
    o.diameter = get_number(sec, "diameter_m", o.diameter);
    o.stiffness = get_number(sec, "stiffness_N_m", o.stiffness);
    o.spill_threshold = get_number(sec, "spill_threshold_m", o.spill_threshold);
    o.hold_base = get_number(sec, "hold_base_N", o.hold_base);
    o.hold_per_deg = get_number(sec, "hold_per_deg_N", o.hold_per_deg);
    o.spill_rate = get_number(sec, "spill_rate_g_per_Ns", o.spill_rate);
    o.fill_mass = get_number(sec, "fill_g", o.fill_mass);
    o.supported = parse_bool(sec.get<std::string>("on_table", "on"), "on_table");
    return o;
  }
  if (*type == "water-cup") {
    WaterCup o;
    o.water_temp = get_number(sec, "water_temp_C", o.water_temp);
    o.diameter = get_number(sec, "diameter_m", o.diameter);
    return o;
  }
  throw ConfigError("unknown object type '" + *type + "'");
}

Scenario scenario_from_tree(const pt::ptree& tree) {
  Scenario s;
  if (auto sec = tree.get_child_optional("scenario")) {
    s.name = sec->get("name", s.name);
    s.task = sec->get("task", s.task);
    if (auto v = sec->get_optional<std::string>("feedback")) s.force_feedback = parse_bool(*v, "feedback");
    if (auto v = sec->get_optional<std::string>("palm_contact")) {
      if (*v == "full") {
        s.palm_contact = PalmContact::Full;
      } else if (*v == "central") {
        s.palm_contact = PalmContact::Central;
      } else if (*v == "none") {
        s.palm_contact = PalmContact::None;
      } else {
        throw ConfigError("palm_contact must be full, central or none");
      }
    }
    if (auto v = sec->get_optional<std::string>("tilt_profile")) {
      for (const auto& p : split_list(*v)) s.tilt.points.push_back(parse_pair(p, "tilt_profile"));
    }
  }
  if (auto sec = tree.get_child_optional("policy")) {
    auto& p = s.policy;
    p.kind = parse_policy_kind(sec->get<std::string>("kind", to_string(p.kind)));
    p.target_force = get_number(*sec, "target_force_N", p.target_force);
    p.band_low = get_number(*sec, "band_low_N", p.band_low);
    p.band_high = get_number(*sec, "band_high_N", p.band_high);
    p.free_speed = deg2rad(get_number(*sec, "free_speed_deg_s", rad2deg(p.free_speed)));
    p.settle_rate = get_number(*sec, "settle_rate_C_s", p.settle_rate);
  }
  if (auto sec = tree.get_child_optional("link")) {
    auto& l = s.link;
    l.latency_ms = get_number(*sec, "latency_ms", l.latency_ms);
    l.jitter_ms = get_number(*sec, "jitter_ms", l.jitter_ms);
    l.drop_probability = get_number(*sec, "drop_probability", l.drop_probability);
    l.seed = static_cast<std::uint64_t>(get_number(*sec, "seed", static_cast<double>(l.seed)));
    if (auto v = sec->get_optional<std::string>("outages")) {
      for (const auto& p : split_list(*v)) {
        const auto [a, b] = parse_pair(p, "outages");
        l.outages.push_back({a, b});
      }
    }
  }
  for (std::size_t i = 0;; ++i) {
    const std::string name = "trial" + std::to_string(i);
    auto sec = tree.get_child_optional(name);
    if (!sec) break;
    Trial t;
    t.object = object_from_section(*sec, name);
    t.duration = get_number(*sec, "duration_s", t.duration);
    t.release = get_number(*sec, "release_s", t.release);
    s.trials.push_back(t);
  }
  s.validate();
  return s;
}

}  // namespace

double Scenario::total_duration() const {
  double total = 0.0;
  for (const auto& t : trials) total += t.duration;
  return total;
}

double Scenario::trial_start(std::size_t index) const {
  double start = 0.0;
  for (std::size_t i = 0; i < index && i < trials.size(); ++i) start += trials[i].duration;
  return start;
}

std::size_t Scenario::trial_at(double t) const {
  double start = 0.0;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    start += trials[i].duration;
    if (t < start) return i;
  }
  return trials.empty() ? 0 : trials.size() - 1;
}

void Scenario::validate() const {
  if (trials.empty()) throw ConfigError("scenario '" + name + "' has no trials");
  for (const auto& t : trials) {
    if (!(t.duration > 0.0)) throw ConfigError("trial duration must be > 0");
    if (!(t.release >= 0.0 && t.release < t.duration)) {
      throw ConfigError("trial release phase must be in [0, duration)");
    }
  }
  for (std::size_t i = 1; i < tilt.points.size(); ++i) {
    if (tilt.points[i].first < tilt.points[i - 1].first) {
      throw ConfigError("tilt profile times must be ascending");
    }
  }
  for (const auto& [t, deg] : tilt.points) {
    if (deg < 0.0 || deg > 10.0) throw ConfigError("tilt must stay within [0, 10] deg");
  }
  if (!(policy.band_low <= policy.band_high)) throw ConfigError("hold band needs low <= high");
  link.validate();
}

HandGeometry load_hand_geometry(const std::string& path) { return parse_hand_geometry(read_file(path)); }
MappingConfig load_mapping_config(const std::string& path) { return parse_mapping_config(read_file(path)); }
Scenario load_scenario(const std::string& path) { return parse_scenario(read_file(path)); }

HandGeometry parse_hand_geometry(const std::string& text) { return geometry_from_tree(read_ini_text(text)); }
MappingConfig parse_mapping_config(const std::string& text) { return mapping_from_tree(read_ini_text(text)); }
Scenario parse_scenario(const std::string& text) { return scenario_from_tree(read_ini_text(text)); }

Scenario builtin_shape_scenario() {
  Scenario s;
  s.name = "task1-shape";
  s.task = "shape";
  s.policy.kind = PolicyKind::CloseUntilForce;
  s.policy.target_force = 3.0;
  s.trials = {{RigidCylinder{0.060, 5000.0}, 4.0, 0.5}, {RigidCylinder{0.080, 5000.0}, 4.0, 0.5}};
  return s;
}

Scenario builtin_stiffness_scenario() {
  Scenario s;
  s.name = "task1-stiffness";
  s.task = "stiffness";
  s.policy.kind = PolicyKind::CloseUntilForce;
  s.policy.target_force = 3.0;
  s.trials = {{CompliantCube{200.0, 0.050}, 5.0, 0.5}, {CompliantCube{20000.0, 0.050}, 5.0, 0.5}};
  return s;
}

Scenario builtin_cup_scenario(bool force_feedback) {
  Scenario s;
  s.name = force_feedback ? "task2-cup" : "task2-cup-no-feedback";
  s.task = "cup";
  s.force_feedback = force_feedback;
  s.policy.kind = PolicyKind::HoldBand;
  s.policy.band_low = 2.15;
  s.policy.band_high = 2.25;
  GranularCup cup;
  cup.supported = true;
  s.trials = {{cup, 12.0, 0.5}};
  s.tilt.points = {{0.0, 0.0}, {4.0, 0.0}, {6.0, 10.0}, {12.0, 10.0}};
  return s;
}

Scenario builtin_thermal_scenario() {
  Scenario s;
  s.name = "task3-thermal";
  s.task = "thermal";
  s.policy.kind = PolicyKind::TemperatureRanker;
  s.policy.target_force = 2.0;
  s.trials = {{WaterCup{20.0}, 20.0, 0.5}, {WaterCup{60.0}, 20.0, 0.5}, {WaterCup{4.0}, 20.0, 0.5}};
  return s;
}

std::optional<Scenario> builtin_scenario(const std::string& name) {
  if (name == "task1-shape") return builtin_shape_scenario();
  if (name == "task1-stiffness") return builtin_stiffness_scenario();
  if (name == "task2-cup") return builtin_cup_scenario(true);
  if (name == "task2-cup-no-feedback") return builtin_cup_scenario(false);
  if (name == "task3-thermal") return builtin_thermal_scenario();
  return std::nullopt;
}

std::vector<std::string> builtin_scenario_names() {
  return {"task1-shape", "task1-stiffness", "task2-cup", "task2-cup-no-feedback", "task3-thermal"};
}

Scenario resolve_scenario(const std::string& name_or_path) {
  if (auto s = builtin_scenario(name_or_path)) return *s;
  std::ifstream probe(name_or_path);
  if (!probe) throw ConfigError("no scenario file or built-in named '" + name_or_path + "'");
  return load_scenario(name_or_path);
}

std::string describe(const TaskObject& object) {
  std::ostringstream ss;
  if (const auto* o = std::get_if<RigidCylinder>(&object)) {
    ss << "cylinder d=" << o->diameter << "m";
  } else if (const auto* c = std::get_if<CompliantCube>(&object)) {
    ss << "cube k=" << c->stiffness << "N/m";
  } else if (const auto* g = std::get_if<GranularCup>(&object)) {
    ss << "granular-cup fill=" << g->fill_mass << "g";
  } else if (const auto* w = std::get_if<WaterCup>(&object)) {
    ss << "water-cup " << w->water_temp << "C";
  }
  return ss.str();
}

}  // namespace mfe
