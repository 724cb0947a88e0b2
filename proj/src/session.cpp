#include "mfe/session.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include "mfe/errors.hpp"

namespace mfe {

namespace {

constexpr int kSplitReceiveTimeoutMs = 10000;

double mean(const std::array<double, kFingers>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::uint64_t period_us(const SessionConfig& cfg) {
  return static_cast<std::uint64_t>(std::llround(1e6 / cfg.control_hz));
}

double clamp_to(double v, const JointLimit& lim) { return std::clamp(v, lim.lower, lim.upper); }

double snap(double angle, const JointLimit& lim) {
  double q = quantize_encoder(clamp_to(angle, lim));
  if (q > lim.upper) q -= kEncoderQuantumRad;
  if (q < lim.lower) q += kEncoderQuantumRad;
  return q;
}

/// Every joint reading passes through the encoder quantizer.
JointState encoder_reading(const JointState& full, const HandGeometry& geometry) {
  JointState out = full;
  for (std::size_t f = 0; f < kFingers; ++f) {
    for (std::size_t j = 0; j < kJointsPerFinger; ++j) {
      auto& a = out.angles[f * kJointsPerFinger + j];
      a = snap(a, geometry[f].joint_limits[j]);
    }
  }
  return out;
}

/// Open pose of the follower: every closure at its lower limit, thumb rotation at 0 if allowed.
std::array<double, kFollowerDof> open_follower_targets(const FollowerHand& hand) {
  std::array<double, kFollowerDof> t{};
  t[0] = hand.fingers[0].closure.lower;
  t[1] = clamp_to(0.0, hand.thumb_rotation);
  for (std::size_t f = 1; f < kFingers; ++f) t[f + 1] = hand.fingers[f].closure.lower;
  return t;
}

double closure_of(const std::array<double, kFollowerDof>& targets, std::size_t finger) {
  return finger == 0 ? targets[0] : targets[finger + 1];
}

ContactMask palm_mask(PalmContact contact, const MappingConfig& cfg) {
  switch (contact) {
    case PalmContact::Full:
      return full_contact();
    case PalmContact::Central:
      return central_contact(cfg);
    case PalmContact::None:
      return no_contact();
  }
  return no_contact();
}

double central_mean(const std::array<double, kPalmSensors>& temps, const MappingConfig& cfg) {
  double sum = 0.0;
  for (auto i : cfg.central_indices) sum += temps[i];
  return sum / static_cast<double>(cfg.central_indices.size());
}

}  // namespace

// ---------------------------------------------------------------------------

SessionConfig SessionConfig::for_scenario(Scenario scenario) {
  SessionConfig cfg;
  cfg.link = scenario.link;
  cfg.scenario = std::move(scenario);
  return cfg;
}

double SessionConfig::run_duration() const {
  return duration ? *duration : scenario.total_duration();
}

std::uint64_t SessionConfig::ticks() const {
  return static_cast<std::uint64_t>(std::llround(run_duration() * control_hz));
}

std::uint32_t SessionConfig::substeps() const {
  return static_cast<std::uint32_t>(std::llround(plant_hz / control_hz));
}

void SessionConfig::validate() const {
  if (duration && !(*duration > 0.0)) throw ConfigError("session duration must be > 0");
  if (!(control_hz > 0.0) || !(plant_hz > 0.0)) throw ConfigError("rates must be > 0");
  const double ratio = plant_hz / control_hz;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 || ratio < 1.0) {
    throw ConfigError("plant rate must be an integer multiple of the control rate");
  }
  const double period = 1e6 / control_hz;
  if (std::abs(period - std::round(period)) > 1e-9) {
    throw ConfigError("control period must be a whole number of microseconds");
  }
  if (!(watchdog_timeout_ms > 0.0)) throw ConfigError("watchdog timeout must be > 0");
  scenario.validate();
  mapping.validate();
  link.validate();
  for (const auto& g : geometry) {
    try {
      g.validate();
    } catch (const DomainError& e) {
      throw ConfigError(std::string("invalid geometry: ") + e.what());
    }
  }
  if (ticks() == 0) throw ConfigError("session must run for at least one control tick");
}

// ---------------------------------------------------------------------------

LeaderStation::LeaderStation(const SessionConfig& cfg)
    : cfg_(cfg),
      inbox_(cfg.link, Direction::FollowerToLeader),
      mapper_(cfg.mapping),
      trial_ops_(cfg.scenario.trials.size()) {
  for (auto& m : motors_) m.current_limit = cfg.mapping.current_limit;
  thermo_.ambient = cfg.mapping.ambient;
  thermo_.surface_temp = cfg.mapping.ambient;
  for (auto& op : trial_ops_) op.last_glove_temp = cfg.mapping.ambient;
}

Bytes LeaderStation::tick(std::uint64_t k, LeaderRecord& rec,
                          const std::optional<std::array<double, kFingers>>& manual) {
  const std::uint64_t now_us = k * period_us(cfg_);
  const double t = static_cast<double>(k) / cfg_.control_hz;
  const double dt_control = 1.0 / cfg_.control_hz;
  const auto& scenario = cfg_.scenario;

  const auto trial = static_cast<std::uint32_t>(scenario.trial_at(t));
  if (trial != current_trial_) {
    current_trial_ = trial;
    trial_ops_[trial] = OperatorState{};
    trial_ops_[trial].last_glove_temp = thermo_.surface_temp;
  }

  for (const auto& frame : inbox_.poll(now_us)) {
    if (frame.kind == FrameKind::SensorFrame) {
      latest_sensor_ = decode_sensor_payload(frame.payload);
      latest_sensor_->timestamp = static_cast<double>(frame.timestamp_us) * 1e-6;
    }
  }
  const double age_ms = static_cast<double>(now_us - inbox_.last_rx_us().value_or(0)) / 1000.0;
  const LinkState link = watchdog_step(age_ms, cfg_.watchdog_timeout_ms);

  HapticCommand cmd;
  const bool use_sensor = link == LinkState::Live && latest_sensor_.has_value();
  if (link == LinkState::Lost) {
    mapper_.reset_contact_state();
    cmd = mapper_.safe_command();
  } else if (!use_sensor) {
    cmd = mapper_.safe_command();
  } else {
    cmd = mapper_.compute_command(*latest_sensor_);
  }

  const std::uint32_t n = cfg_.substeps();
  const double dt = 1.0 / cfg_.plant_hz;
  double voltage = 0.0;
  for (std::uint32_t s = 0; s < n; ++s) {
    for (std::size_t f = 0; f < kFingers; ++f) {
      motors_[f].commanded_current = cmd.motor_current[f];
      fluidics_[f].drive_voltage = cmd.pwm_duty[f] * kFluidicMaxVoltage;
      fluidics_[f] = step_microfluidic(fluidics_[f], dt);
    }
    voltage = pid_step(pid_, cmd.palm_setpoint, thermo_.surface_temp, dt);
    thermo_.drive_voltage = voltage;
    thermo_ = step_thermo(thermo_, dt);
  }

  rec.tick = k;
  rec.time = t;
  rec.trial = trial;
  rec.link = link;
  rec.has_sensor = use_sensor;
  rec.sensor = use_sensor ? *latest_sensor_ : SensorFrame{};
  rec.command = cmd;
  for (std::size_t f = 0; f < kFingers; ++f) {
    rec.torque[f] = motor_torque(motors_[f], motors_[f].commanded_current);
    rec.pressure[f] = fluidics_[f].pressure;
    felt_[f] = scenario.force_feedback ? cmd.motor_current[f] / cfg_.mapping.current_per_force : 0.0;
  }
  rec.glove_temp = thermo_.surface_temp;
  rec.thermo_voltage = voltage;
  rec.felt_force = felt_;

  // Operator decides the next pose from what the glove renders now.
  JointState pose;
  pose.timestamp = t;
  pose.angles.assign(kFingers, 0.0);
  const double in_trial = t - scenario.trial_start(trial);
  if (manual) {
    for (std::size_t f = 0; f < kFingers; ++f) {
      const auto& g = cfg_.geometry[f];
      pose.angles[f] = snap((*manual)[f], g.joint_limits[g.actuated_joint]);
    }
  } else if (in_trial >= scenario.trials[trial].release) {
    RenderedState rendered{felt_, thermo_.surface_temp, t};
    pose = scripted_operator(scenario.policy, rendered, trial_ops_[trial], cfg_.geometry, dt_control);
  } else {
    trial_ops_[trial].last_glove_temp = thermo_.surface_temp;
    for (std::size_t f = 0; f < kFingers; ++f) {
      const auto& g = cfg_.geometry[f];
      pose.angles[f] = snap(0.0, g.joint_limits[g.actuated_joint]);
    }
  }
  std::copy(pose.angles.begin(), pose.angles.end(), rec.leader_closure.begin());

  const JointState full = encoder_reading(expand_leader_state(pose, cfg_.geometry), cfg_.geometry);
  return encode(make_encoder_frame(full, static_cast<std::uint32_t>(k + 1), now_us));
}

// ---------------------------------------------------------------------------

FollowerStation::FollowerStation(const SessionConfig& cfg)
    : cfg_(cfg),
      inbox_(cfg.link, Direction::LeaderToFollower),
      object_(cfg.scenario.trials.front().object),
      membrane_(MembranePlant::at_ambient(cfg.mapping.ambient)) {}

Bytes FollowerStation::tick(std::uint64_t k, FollowerRecord& rec) {
  const std::uint64_t now_us = k * period_us(cfg_);
  const double t = static_cast<double>(k) / cfg_.control_hz;
  const double dt_control = 1.0 / cfg_.control_hz;
  const auto& scenario = cfg_.scenario;

  for (const auto& frame : inbox_.poll(now_us)) {
    if (frame.kind == FrameKind::EncoderFrame) {
      JointState pose = decode_encoder_payload(frame.payload);
      pose.timestamp = static_cast<double>(frame.timestamp_us) * 1e-6;
      // float32 transport can nudge a reading across a limit; clamp it back.
      for (std::size_t f = 0; f < kFingers; ++f) {
        for (std::size_t j = 0; j < kJointsPerFinger; ++j) {
          auto& a = pose.angles[f * kJointsPerFinger + j];
          a = clamp_to(a, cfg_.geometry[f].joint_limits[j]);
        }
      }
      leader_pose_ = std::move(pose);
    }
  }

  const auto trial = static_cast<std::uint32_t>(scenario.trial_at(t));
  if (!trial_started_ || trial != current_trial_) {
    trial_started_ = true;
    current_trial_ = trial;
    object_ = scenario.trials[trial].object;
  }
  const double in_trial = t - scenario.trial_start(trial);
  const bool present = in_trial >= scenario.trials[trial].release;

  std::array<double, kFollowerDof> targets = open_follower_targets(cfg_.follower);
  if (leader_pose_) {
    targets = retarget_pose(*leader_pose_, cfg_.geometry, cfg_.follower).targets;
    const auto& g = cfg_.geometry[1];
    rec.rx_index_angle = leader_pose_->angles[1 * kJointsPerFinger + g.actuated_joint];
  }

  const double surface = contact_distance(object_);
  for (std::size_t f = 0; f < kFingers; ++f) {
    const double s = follower_closure_distance(cfg_.follower.fingers[f], closure_of(targets, f));
    rec.penetration[f] = present ? std::max(0.0, s - surface) : 0.0;
    rec.force[f] = contact_force(object_, rec.penetration[f]);
  }
  rec.grip = mean(rec.force);

  rec.tilt = 0.0;
  if (auto* cup = std::get_if<GranularCup>(&object_)) {
    rec.tilt = std::clamp(scenario.tilt.at(in_trial), 0.0, 10.0);
    if (present) {
      if (cup->supported && rec.grip >= cup->hold_min(0.0)) cup->supported = false;
      *cup = cup_step(*cup, rec.grip, rec.tilt, dt_control);
    }
    rec.spilled = cup->spilled_mass;
    rec.remaining = cup->remaining();
    rec.dropped = cup->dropped;
  }

  const bool touching = present && std::any_of(rec.force.begin(), rec.force.end(),
                                               [](double f) { return f > 0.0; });
  const ContactMask mask = touching ? palm_mask(scenario.palm_contact, cfg_.mapping) : no_contact();
  const double object_temp = object_temperature(object_, cfg_.mapping.ambient);
  const std::uint32_t n = cfg_.substeps();
  const double dt = 1.0 / cfg_.plant_hz;
  for (std::uint32_t s = 0; s < n; ++s) sense_membrane(object_temp, membrane_, mask, dt);

  rec.tick = k;
  rec.trial = trial;
  rec.has_pose = leader_pose_.has_value();
  rec.object_present = present;
  rec.targets = targets;
  rec.object_temp = object_temp;
  rec.palm_center_temp = central_mean(membrane_.temps, cfg_.mapping);

  SensorFrame frame;
  frame.contact_force = rec.force;
  frame.palm_temps = membrane_.temps;
  frame.timestamp = t;
  return encode(make_sensor_frame(frame, static_cast<std::uint32_t>(k + 1), now_us));
}

// ---------------------------------------------------------------------------

namespace {

struct RunOutput {
  SessionLog log;
  std::vector<OperatorState> ops;
  std::size_t dropped = 0;
  std::size_t stale = 0;
  std::size_t rejected = 0;
};

[[noreturn]] void abort_session(const std::string& what, SessionLog& log, const SessionConfig& cfg) {
  if (!cfg.log_path.empty()) {
    try {
      write_session_log(log, cfg.log_path);
    } catch (...) {
    }
  }
  throw SessionError("session aborted at tick " + std::to_string(log.records.size()) + ": " + what,
                     std::move(log));
}

RunOutput run_combined(const SessionConfig& cfg) {
  RunOutput out;
  out.log.mapping = cfg.mapping;
  out.log.scenario_name = cfg.scenario.name;
  LeaderStation leader(cfg);
  FollowerStation follower(cfg);
  std::optional<WireLogWriter> wire;
  if (!cfg.wire_log_path.empty()) wire.emplace(cfg.wire_log_path);

  const std::uint64_t n = cfg.ticks();
  out.log.records.reserve(n);
  for (std::uint64_t k = 0; k < n; ++k) {
    TickRecord rec;
    try {
      const Bytes to_follower = leader.tick(k, rec.leader);
      const Bytes to_leader = follower.tick(k, rec.follower);
      if (wire) {
        wire->append(Direction::LeaderToFollower, to_follower);
        wire->append(Direction::FollowerToLeader, to_leader);
      }
      follower.receive(to_follower);
      leader.receive(to_leader);
    } catch (const std::exception& e) {
      abort_session(e.what(), out.log, cfg);
    }
    out.log.records.push_back(rec);
  }
  out.ops = leader.operator_states();
  out.dropped = leader.inbox().dropped() + follower.inbox().dropped();
  out.stale = leader.inbox().stale() + follower.inbox().stale();
  out.rejected = leader.inbox().rejected() + follower.inbox().rejected();
  return out;
}

struct FollowerTotals {
  std::uint64_t dropped = 0;
  std::uint64_t stale = 0;
  std::uint64_t rejected = 0;
  std::uint64_t completed = 0;
};

RunOutput run_split(const SessionConfig& cfg) {
  UdpEndpoint leader_ep(cfg.leader_port);
  UdpEndpoint follower_ep(cfg.follower_port);
  leader_ep.connect_peer(follower_ep.local_port());
  follower_ep.connect_peer(leader_ep.local_port());

  char path[] = "/tmp/mfe-follower-XXXXXX";
  const int fd = ::mkstemp(path);
  if (fd < 0) throw std::runtime_error("cannot create follower record file");
  ::close(fd);
  const std::uint64_t n = cfg.ticks();

  std::fflush(nullptr);
  const pid_t pid = ::fork();
  if (pid < 0) throw std::runtime_error("fork failed");
  if (pid == 0) {
    // Follower process: only the wire and its own record file.
    int status = 0;
    FollowerTotals totals;
    std::FILE* out = std::fopen(path, "wb");
    try {
      FollowerStation follower(cfg);
      for (std::uint64_t k = 0; k < n; ++k) {
        FollowerRecord rec;
        follower_ep.send(follower.tick(k, rec));
        std::fwrite(&rec, sizeof(rec), 1, out);
        auto dg = follower_ep.receive(kSplitReceiveTimeoutMs);
        if (!dg) throw std::runtime_error("leader silent");
        follower.receive(*dg);
        totals.completed = k + 1;
      }
      totals.dropped = follower.inbox().dropped();
      totals.stale = follower.inbox().stale();
      totals.rejected = follower.inbox().rejected();
    } catch (...) {
      status = 3;
    }
    std::fwrite(&totals, sizeof(totals), 1, out);
    std::fclose(out);
    ::_exit(status);
  }

  RunOutput out;
  out.log.mapping = cfg.mapping;
  out.log.scenario_name = cfg.scenario.name;
  std::vector<LeaderRecord> leader_records;
  leader_records.reserve(n);
  std::string failure;
  std::optional<LeaderStation> leader;
  try {
    leader.emplace(cfg);
    std::optional<WireLogWriter> wire;
    if (!cfg.wire_log_path.empty()) wire.emplace(cfg.wire_log_path);
    for (std::uint64_t k = 0; k < n; ++k) {
      LeaderRecord rec;
      const Bytes to_follower = leader->tick(k, rec);
      leader_ep.send(to_follower);
      leader_records.push_back(rec);
      auto dg = leader_ep.receive(kSplitReceiveTimeoutMs);
      if (!dg) throw std::runtime_error("follower silent");
      if (wire) {
        wire->append(Direction::LeaderToFollower, to_follower);
        wire->append(Direction::FollowerToLeader, *dg);
      }
      leader->receive(*dg);
    }
  } catch (const std::exception& e) {
    failure = e.what();
    ::kill(pid, SIGTERM);
  }
  int status = 0;
  ::waitpid(pid, &status, 0);

  std::vector<FollowerRecord> follower_records;
  FollowerTotals totals;
  if (std::FILE* in = std::fopen(path, "rb")) {
    FollowerRecord rec;
    for (std::uint64_t k = 0; k < n && std::fread(&rec, sizeof(rec), 1, in) == 1; ++k) {
      follower_records.push_back(rec);
    }
    if (follower_records.size() == n) {
      if (std::fread(&totals, sizeof(totals), 1, in) != 1) totals = {};
    }
    std::fclose(in);
  }
  std::remove(path);

  const std::size_t complete = std::min(leader_records.size(), follower_records.size());
  for (std::size_t i = 0; i < complete; ++i) {
    out.log.records.push_back({leader_records[i], follower_records[i]});
  }
  if (!failure.empty() || !WIFEXITED(status) || WEXITSTATUS(status) != 0 || complete != n) {
    if (failure.empty()) failure = "follower process failed";
    abort_session(failure, out.log, cfg);
  }
  out.ops = leader->operator_states();
  out.dropped = leader->inbox().dropped() + totals.dropped;
  out.stale = leader->inbox().stale() + totals.stale;
  out.rejected = leader->inbox().rejected() + totals.rejected;
  return out;
}

}  // namespace

SessionResult run_session(const SessionConfig& cfg) {
  cfg.validate();
  RunOutput run = cfg.mode == SessionMode::Split ? run_split(cfg) : run_combined(cfg);
  if (!cfg.log_path.empty()) write_session_log(run.log, cfg.log_path);
  SessionResult result;
  result.summary = summarize(run.log, cfg, run.ops);
  result.summary.frames_dropped = run.dropped;
  result.summary.frames_stale = run.stale;
  result.summary.frames_rejected = run.rejected;
  result.log = std::move(run.log);
  return result;
}

// ---------------------------------------------------------------------------

std::uint64_t count_safety_violations(const SessionLog& log) {
  const auto& m = log.mapping;
  std::uint64_t violations = 0;
  for (const auto& r : log.records) {
    const auto& c = r.leader.command;
    bool bad = !(c.palm_setpoint >= m.temp_min && c.palm_setpoint <= m.temp_max);
    for (std::size_t f = 0; f < kFingers; ++f) {
      bad = bad || !(std::abs(c.motor_current[f]) <= m.current_limit);
      bad = bad || !(c.pwm_duty[f] >= 0.0 && c.pwm_duty[f] <= 1.0);
    }
    if (bad) ++violations;
  }
  return violations;
}

SessionSummary summarize(const SessionLog& log, const SessionConfig& cfg,
                         const std::vector<OperatorState>& ranker_states) {
  SessionSummary s;
  s.scenario = cfg.scenario.name;
  s.ticks = log.records.size();
  s.safety_violations = count_safety_violations(log);
  for (const auto& r : log.records) {
    if (r.leader.link == LinkState::Lost) ++s.lost_ticks;
  }

  const auto& scenario = cfg.scenario;
  const double target = scenario.policy.target_force;
  s.trials.resize(scenario.trials.size());
  for (std::size_t i = 0; i < scenario.trials.size(); ++i) {
    auto& ts = s.trials[i];
    ts.object = describe(scenario.trials[i].object);
    ts.start = scenario.trial_start(i);
    ts.object_temp = object_temperature(scenario.trials[i].object, cfg.mapping.ambient);
    const TickRecord* prev = nullptr;
    std::optional<double> presented_glove;
    double presented_time = 0.0;
    for (const auto& r : log.records) {
      if (r.follower.trial != i) continue;
      const auto& fr = r.follower;
      if (fr.force[1] > 0.0 && !ts.contact_onset_angle) ts.contact_onset_angle = fr.rx_index_angle;
      if (fr.force[1] >= target && !ts.penetration_at_target && prev) {
        const auto& pf = prev->follower;
        const double f0 = pf.force[1];
        const double f1 = fr.force[1];
        const double p0 = pf.penetration[1];
        const double p1 = fr.penetration[1];
        ts.penetration_at_target = f1 == f0 ? p1 : p0 + (target - f0) * (p1 - p0) / (f1 - f0);
      }
      ts.max_grip = std::max(ts.max_grip, fr.grip);
      ts.spilled = fr.spilled;
      ts.dropped = fr.dropped;
      ts.final_glove_temp = r.leader.glove_temp;
      if (fr.object_present) {
        if (!presented_glove) {
          presented_glove = r.leader.glove_temp;
          presented_time = r.leader.time;
        } else if (!ts.time_to_5c_delta && std::abs(r.leader.glove_temp - *presented_glove) >= 5.0) {
          ts.time_to_5c_delta = r.leader.time - presented_time;
        }
      }
      prev = &r;
    }
    if (i < ranker_states.size()) ts.settled_glove_temp = ranker_states[i].settled_temp;
  }

  if (scenario.policy.kind == PolicyKind::TemperatureRanker && !s.trials.empty()) {
    std::vector<double> perceived;
    bool all_settled = true;
    double last_settle = 0.0;
    for (std::size_t i = 0; i < s.trials.size(); ++i) {
      const auto& ts = s.trials[i];
      perceived.push_back(ts.settled_glove_temp.value_or(ts.final_glove_temp));
      if (i < ranker_states.size() && ranker_states[i].settled_time) {
        last_settle = std::max(last_settle, *ranker_states[i].settled_time);
      } else {
        all_settled = false;
      }
    }
    s.ranking = rank_by_temperature(perceived);
    if (all_settled) s.time_to_ranking = last_settle;
  }
  return s;
}

nlohmann::json SessionSummary::to_json() const {
  nlohmann::json j;
  j["scenario"] = scenario;
  j["ticks"] = ticks;
  j["lost_ticks"] = lost_ticks;
  j["safety_violations"] = safety_violations;
  j["frames"] = {{"dropped", frames_dropped}, {"stale", frames_stale}, {"rejected", frames_rejected}};
  auto opt = [](const std::optional<double>& v) -> nlohmann::json {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  j["trials"] = nlohmann::json::array();
  for (const auto& t : trials) {
    j["trials"].push_back({
        {"object", t.object},
        {"start_s", t.start},
        {"contact_onset_angle_rad", opt(t.contact_onset_angle)},
        {"penetration_at_target_m", opt(t.penetration_at_target)},
        {"max_grip_N", t.max_grip},
        {"spilled_g", t.spilled},
        {"dropped", t.dropped},
        {"object_temp_C", t.object_temp},
        {"final_glove_temp_C", t.final_glove_temp},
        {"settled_glove_temp_C", opt(t.settled_glove_temp)},
        {"time_to_5C_delta_s", opt(t.time_to_5c_delta)},
    });
  }
  j["ranking"] = ranking;
  j["time_to_ranking_s"] = opt(time_to_ranking);
  return j;
}

nlohmann::json ReplayReport::to_json() const {
  nlohmann::json j;
  j["ticks"] = ticks;
  j["divergences"] = divergences;
  j["first_divergent_tick"] =
      first_divergent_tick ? nlohmann::json(*first_divergent_tick) : nlohmann::json(nullptr);
  j["safety_violations"] = safety_violations;
  j["ok"] = ok();
  return j;
}

ReplayReport replay(const SessionLog& log, const std::optional<MappingConfig>& mapping) {
  HapticMapper mapper(mapping ? *mapping : log.mapping);
  ReplayReport report;
  report.ticks = log.records.size();
  report.safety_violations = count_safety_violations(log);
  for (const auto& r : log.records) {
    const auto& lr = r.leader;
    HapticCommand expected;
    if (lr.link == LinkState::Lost) {
      mapper.reset_contact_state();
      expected = mapper.safe_command();
    } else if (!lr.has_sensor) {
      expected = mapper.safe_command();
    } else {
      expected = mapper.compute_command(lr.sensor);
    }
    if (!(expected == lr.command)) {
      ++report.divergences;
      if (!report.first_divergent_tick) report.first_divergent_tick = lr.tick;
    }
  }
  return report;
}

}  // namespace mfe
