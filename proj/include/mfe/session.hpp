#pragma once

// Closed-loop teleoperation session: leader station (operator + glove
// plants + mapping) and follower station (retargeting + environment +
// palm membrane) exchanging frames over a simulated link on a logical clock.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mfe/environment.hpp"
#include "mfe/mapping.hpp"
#include "mfe/plants.hpp"
#include "mfe/protocol.hpp"
#include "mfe/retarget.hpp"
#include "mfe/scenario.hpp"

namespace mfe {

enum class SessionMode { Combined, Split };

struct SessionConfig {
  Scenario scenario;
  MappingConfig mapping;
  HandGeometry geometry = default_hand_geometry();
  FollowerHand follower = default_follower_hand();
  LinkModel link;                        // used for both directions
  std::optional<double> duration;        // s, defaults to the scenario length
  double control_hz = 100.0;
  double plant_hz = 1000.0;
  double watchdog_timeout_ms = kDefaultWatchdogTimeoutMs;
  SessionMode mode = SessionMode::Combined;
  std::uint16_t leader_port = 0;         // split mode UDP ports, 0 = ephemeral
  std::uint16_t follower_port = 0;
  std::string log_path;                  // CSV session log; empty = keep in memory only
  std::string wire_log_path;             // binary record of every datagram; empty = off

  /// Scenario defaults with the scenario's own link model.
  static SessionConfig for_scenario(Scenario scenario);

  double run_duration() const;
  std::uint64_t ticks() const;
  std::uint32_t substeps() const;
  void validate() const;
};

struct LeaderRecord {
  std::uint64_t tick = 0;
  double time = 0.0;
  std::uint32_t trial = 0;
  LinkState link = LinkState::Live;
  bool has_sensor = false;
  std::array<double, kFingers> leader_closure{};  // rad, actuated angles sent this tick
  SensorFrame sensor;                               // frame the mapping used
  HapticCommand command;
  std::array<double, kFingers> torque{};           // Nm
  std::array<double, kFingers> pressure{};         // kPa
  double glove_temp = kAmbientC;                    // degC
  double thermo_voltage = 0.0;                      // V
  std::array<double, kFingers> felt_force{};        // N, what the operator model perceived
};

struct FollowerRecord {
  std::uint64_t tick = 0;
  std::uint32_t trial = 0;
  bool has_pose = false;
  bool object_present = false;
  double rx_index_angle = 0.0;  // rad, leader index actuated angle in use
  std::array<double, kFollowerDof> targets{};
  std::array<double, kFingers> penetration{};  // m
  std::array<double, kFingers> force{};        // N
  double grip = 0.0;                            // N, mean finger force
  double tilt = 0.0;                            // deg
  double spilled = 0.0;                         // g
  double remaining = 0.0;                       // g
  bool dropped = false;
  double object_temp = kAmbientC;
  double palm_center_temp = kAmbientC;          // mean of central sensors
};

struct TickRecord {
  LeaderRecord leader;
  FollowerRecord follower;
};

struct SessionLog {
  MappingConfig mapping;
  std::string scenario_name;
  std::vector<TickRecord> records;
};

struct TrialSummary {
  std::string object;
  double start = 0.0;
  std::optional<double> contact_onset_angle;   // rad, leader index angle at first contact
  std::optional<double> penetration_at_target; // m, interpolated at the policy target force
  double max_grip = 0.0;
  double spilled = 0.0;
  bool dropped = false;
  double object_temp = kAmbientC;
  double final_glove_temp = kAmbientC;
  std::optional<double> settled_glove_temp;    // ranker reading
  std::optional<double> time_to_5c_delta;      // s after presentation
};

struct SessionSummary {
  std::string scenario;
  std::uint64_t ticks = 0;
  std::uint64_t lost_ticks = 0;
  std::uint64_t safety_violations = 0;
  std::size_t frames_dropped = 0;
  std::size_t frames_stale = 0;
  std::size_t frames_rejected = 0;
  std::vector<TrialSummary> trials;
  std::vector<std::size_t> ranking;            // trial indices, hottest first (ranker)
  std::optional<double> time_to_ranking;       // s

  nlohmann::json to_json() const;
};

struct SessionResult {
  SessionLog log;
  SessionSummary summary;
};

/// Raised when a session aborts mid-run; the partial log has been flushed.
class SessionError : public std::runtime_error {
 public:
  SessionError(const std::string& what, SessionLog partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const SessionLog& partial() const { return partial_; }

 private:
  SessionLog partial_;
};

// Stations --------------------------------------------------------------------

class LeaderStation {
 public:
  explicit LeaderStation(const SessionConfig& cfg);

  /// Delivers a datagram from the follower.
  void receive(std::span<const std::uint8_t> datagram) { inbox_.push(datagram); }

  /// Runs control tick `k`.  `manual` replaces the scripted operator with
  /// externally supplied actuated angles (rad, quantized here).  Returns the
  /// datagram to send to the follower.
  Bytes tick(std::uint64_t k, LeaderRecord& record,
             const std::optional<std::array<double, kFingers>>& manual = std::nullopt);

  const FrameInbox& inbox() const { return inbox_; }
  const std::vector<OperatorState>& operator_states() const { return trial_ops_; }

 private:
  const SessionConfig& cfg_;
  FrameInbox inbox_;
  HapticMapper mapper_;
  std::array<MotorPlant, kFingers> motors_{};
  std::array<MicrofluidicPlant, kFingers> fluidics_{};
  ThermoPlant thermo_;
  PidController pid_;
  std::optional<SensorFrame> latest_sensor_;
  std::vector<OperatorState> trial_ops_;
  std::array<double, kFingers> felt_{};
  std::uint32_t current_trial_ = 0;
};

class FollowerStation {
 public:
  explicit FollowerStation(const SessionConfig& cfg);

  void receive(std::span<const std::uint8_t> datagram) { inbox_.push(datagram); }

  Bytes tick(std::uint64_t k, FollowerRecord& record);

  const FrameInbox& inbox() const { return inbox_; }

 private:
  const SessionConfig& cfg_;
  FrameInbox inbox_;
  std::optional<JointState> leader_pose_;
  TaskObject object_;
  MembranePlant membrane_;
  std::uint32_t current_trial_ = 0;
  bool trial_started_ = false;
};

// Runtime ---------------------------------------------------------------------

SessionResult run_session(const SessionConfig& cfg);

/// Number of commands outside the current, duty or setpoint bounds.
std::uint64_t count_safety_violations(const SessionLog& log);

SessionSummary summarize(const SessionLog& log, const SessionConfig& cfg,
                         const std::vector<OperatorState>& ranker_states = {});

/// CSV serialization.  Doubles use the shortest round-trip form so that
/// read_session_log(write) reproduces every value bit-exactly.
std::string session_log_csv(const SessionLog& log);
SessionLog parse_session_log(const std::string& csv);
void write_session_log(const SessionLog& log, const std::string& path);
SessionLog read_session_log(const std::string& path);

/// `t_s,grip_N,duty,current_mA,temp_C,spilled_g` per tick (mean duty/current over fingers).
std::string step_log_csv(const SessionLog& log);

struct ReplayReport {
  std::uint64_t ticks = 0;
  std::uint64_t divergences = 0;
  std::optional<std::uint64_t> first_divergent_tick;
  std::uint64_t safety_violations = 0;

  bool ok() const { return divergences == 0; }
  nlohmann::json to_json() const;
};

/// Recomputes every command from the logged sensor frames and link states
/// and compares bit-exactly.  `mapping` overrides the config stored in the log.
ReplayReport replay(const SessionLog& log, const std::optional<MappingConfig>& mapping = std::nullopt);

}  // namespace mfe
