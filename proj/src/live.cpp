#include "mfe/live.hpp"

#include <cmath>

#include "mfe/errors.hpp"

namespace mfe {

namespace {

template <std::size_t N>
nlohmann::json degrees(const std::array<double, N>& rad) {
  auto out = nlohmann::json::array();
  for (double v : rad) out.push_back(rad2deg(v));
  return out;
}

template <std::size_t N>
nlohmann::json values(const std::array<double, N>& a) {
  return nlohmann::json(std::vector<double>(a.begin(), a.end()));
}

}  // namespace

LiveSession::LiveSession(SessionConfig cfg) : cfg_(std::make_unique<SessionConfig>(std::move(cfg))) {
  cfg_->mode = SessionMode::Combined;
  cfg_->log_path.clear();
  cfg_->wire_log_path.clear();
  cfg_->validate();
  restart();
}

void LiveSession::restart() {
  leader_ = std::make_unique<LeaderStation>(*cfg_);
  follower_ = std::make_unique<FollowerStation>(*cfg_);
  tick_ = 0;
  last_ = TickRecord{};
}

const TickRecord& LiveSession::step() {
  TickRecord rec;
  const Bytes to_follower = leader_->tick(tick_, rec.leader, manual_);
  const Bytes to_leader = follower_->tick(tick_, rec.follower);
  follower_->receive(to_follower);
  leader_->receive(to_leader);
  ++tick_;
  last_ = rec;
  return last_;
}

void LiveSession::switch_scenario(Scenario scenario) {
  scenario.validate();
  cfg_->scenario = std::move(scenario);
  restart();
}

nlohmann::json telemetry_json(const TickRecord& rec, const SessionConfig& cfg) {
  const auto& l = rec.leader;
  const auto& f = rec.follower;
  nlohmann::json j;
  j["type"] = "telemetry";
  j["schema"] = kConsoleSchemaVersion;
  j["protocol_version"] = kProtocolVersion;
  j["tick"] = l.tick;
  j["t_s"] = l.time;
  j["scenario"] = cfg.scenario.name;
  j["trial"] = l.trial;
  j["object"] = l.trial < cfg.scenario.trials.size() ? describe(cfg.scenario.trials[l.trial].object) : "";
  j["link"] = std::string(to_string(l.link));
  j["safe"] = l.command.is_safe(cfg.mapping.ambient);
  j["joint_deg"] = degrees(l.leader_closure);
  j["target_deg"] = degrees(f.targets);
  j["force_N"] = values(l.sensor.contact_force);
  j["current_mA"] = values(l.command.motor_current);
  j["duty"] = values(l.command.pwm_duty);
  j["pressure_kPa"] = values(l.pressure);
  j["setpoint_C"] = l.command.palm_setpoint;
  j["glove_C"] = l.glove_temp;
  j["grip_N"] = f.grip;
  j["spilled_g"] = f.spilled;
  j["dropped"] = f.dropped;
  return j;
}

InputRateLimiter::InputRateLimiter(double max_hz) {
  if (!(max_hz > 0.0)) throw ConfigError("input rate must be > 0");
  interval_ = 1.0 / max_hz;
}

void InputRateLimiter::submit(double, const std::array<double, kFingers>& value) { pending_ = value; }

std::optional<std::array<double, kFingers>> InputRateLimiter::poll(double now_s) {
  if (!pending_) return std::nullopt;
  // small slack so exact multiples of the interval are not rejected by rounding
  if (last_sent_ && now_s - *last_sent_ < interval_ - 1e-9) return std::nullopt;
  last_sent_ = now_s;
  auto out = pending_;
  pending_.reset();
  return out;
}

ConsoleInput parse_console_input(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad json: ") + e.what());
  }
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
    throw ConfigError("message needs a string 'type'");
  }
  const auto type = j["type"].get<std::string>();
  ConsoleInput in;
  if (j.contains("session")) {
    if (!j["session"].is_number_unsigned()) throw ConfigError("session must be a non-negative integer");
    in.session = j["session"].get<std::uint64_t>();
  }
  if (type == "input") {
    in.kind = ConsoleInput::Kind::Closure;
    const auto& c = j.value("closure_deg", nlohmann::json());
    if (!c.is_array() || c.size() != kFingers) throw ConfigError("closure_deg needs 5 numbers");
    for (std::size_t i = 0; i < kFingers; ++i) {
      if (!c[i].is_number()) throw ConfigError("closure_deg needs 5 numbers");
      const double v = c[i].get<double>();
      if (!std::isfinite(v)) throw ConfigError("closure_deg must be finite");
      in.closure[i] = deg2rad(v);
    }
  } else if (type == "release") {
    in.kind = ConsoleInput::Kind::Release;
  } else if (type == "scenario") {
    in.kind = ConsoleInput::Kind::Scenario;
    if (!j.contains("name") || !j["name"].is_string()) throw ConfigError("scenario needs a 'name'");
    in.scenario = j["name"].get<std::string>();
  } else {
    throw ConfigError("unknown message type '" + type + "'");
  }
  return in;
}

}  // namespace mfe
