#pragma once

// Incrementally stepped session for interactive use (mfe serve), plus the
// JSON telemetry/input schema shared with the operator console.

#include <array>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "mfe/session.hpp"

namespace mfe {

inline constexpr int kConsoleSchemaVersion = 1;

class LiveSession {
 public:
  explicit LiveSession(SessionConfig cfg);

  /// Advances one control tick and returns its record.
  const TickRecord& step();

  /// Operator closure angles (rad) replacing the scripted operator until cleared.
  void set_manual(const std::array<double, kFingers>& closure) { manual_ = closure; }
  void clear_manual() { manual_.reset(); }
  bool manual() const { return manual_.has_value(); }

  /// Restarts from tick 0 with a new scenario; mapping, geometry and link stay.
  void switch_scenario(Scenario scenario);

  std::uint64_t tick() const { return tick_; }
  const SessionConfig& config() const { return *cfg_; }
  const TickRecord& last() const { return last_; }

 private:
  void restart();

  std::unique_ptr<SessionConfig> cfg_;  // stations keep a reference
  std::unique_ptr<LeaderStation> leader_;
  std::unique_ptr<FollowerStation> follower_;
  std::optional<std::array<double, kFingers>> manual_;
  std::uint64_t tick_ = 0;
  TickRecord last_;
};

/// {"type":"telemetry", ...} message for one tick.
nlohmann::json telemetry_json(const TickRecord& rec, const SessionConfig& cfg);

/// Coalesces bursts of operator input to at most max_hz outbound updates;
/// the latest value always wins.
class InputRateLimiter {
 public:
  explicit InputRateLimiter(double max_hz);

  void submit(double now_s, const std::array<double, kFingers>& value);
  /// Value to forward at now_s, if one is pending and the interval has elapsed.
  std::optional<std::array<double, kFingers>> poll(double now_s);

 private:
  double interval_;
  std::optional<double> last_sent_;
  std::optional<std::array<double, kFingers>> pending_;
};

struct ConsoleInput {
  enum class Kind { Closure, Release, Scenario } kind = Kind::Release;
  std::array<double, kFingers> closure{};  // rad
  std::string scenario;
  std::optional<std::uint64_t> session;  // epoch the client last saw, if sent
};

/// Parses a client message; throws ConfigError with a readable reason.
ConsoleInput parse_console_input(const std::string& text);

}  // namespace mfe
