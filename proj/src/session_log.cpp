#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>

#include <boost/algorithm/string.hpp>

#include "mfe/errors.hpp"
#include "mfe/session.hpp"

namespace mfe {

namespace {

constexpr std::string_view kLogMagic = "# mfe-session-log v1";

class RowWriter {
 public:
  explicit RowWriter(std::string& out) : out_(out) {}

  void num(double v) {
    sep();
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof(buf), v);
    out_.append(buf, r.ptr);
  }
  void num(std::uint64_t v) {
    sep();
    out_ += std::to_string(v);
  }
  void flag(bool v) { num(static_cast<std::uint64_t>(v ? 1 : 0)); }
  void text(std::string_view v) {
    sep();
    out_ += v;
  }
  template <std::size_t N>
  void nums(const std::array<double, N>& v) {
    for (double x : v) num(x);
  }
  void end() {
    out_ += '\n';
    first_ = true;
  }

 private:
  void sep() {
    if (!first_) out_ += ',';
    first_ = false;
  }
  std::string& out_;
  bool first_ = true;
};

class RowReader {
 public:
  RowReader(std::string_view line, std::size_t line_no) : line_no_(line_no) {
    boost::split(fields_, line, boost::is_any_of(","));
  }

  std::string_view next() {
    if (pos_ >= fields_.size()) fail("too few fields");
    return fields_[pos_++];
  }
  double real() {
    auto s = next();
    double v = 0.0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) fail("bad number '" + std::string(s) + "'");
    return v;
  }
  std::uint64_t integer() {
    auto s = next();
    std::uint64_t v = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) fail("bad integer '" + std::string(s) + "'");
    return v;
  }
  bool flag() {
    auto v = integer();
    if (v > 1) fail("bad flag");
    return v == 1;
  }
  template <std::size_t N>
  void reals(std::array<double, N>& v) {
    for (auto& x : v) x = real();
  }
  void finish() {
    if (pos_ != fields_.size()) fail("too many fields");
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("session log line " + std::to_string(line_no_) + ": " + what);
  }
  std::vector<std::string_view> fields_;
  std::size_t pos_ = 0;
  std::size_t line_no_;
};

std::string header_row() {
  std::string h = "tick,t_s,trial,link,has_sensor";
  auto group = [&h](std::string_view prefix, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      h += ',';
      h += prefix;
      h += std::to_string(i);
    }
  };
  group("q", kFingers);
  group("sensor_force", kFingers);
  group("sensor_temp", kPalmSensors);
  h += ",sensor_ts,seq";
  group("current", kFingers);
  group("duty", kFingers);
  h += ",setpoint";
  group("torque", kFingers);
  group("pressure", kFingers);
  h += ",glove_C,thermo_V";
  group("felt", kFingers);
  h += ",has_pose,object_present,rx_index_q";
  group("target", kFollowerDof);
  group("penetration", kFingers);
  group("force", kFingers);
  h += ",grip_N,tilt_deg,spilled_g,remaining_g,dropped,object_C,palm_C";
  return h;
}

void write_mapping_line(std::string& out, const MappingConfig& m) {
  out += "# mapping";
  RowWriter w(out);
  w.text("");  // leading separator
  w.num(m.force_threshold);
  w.num(m.current_per_force);
  w.num(m.pressure_gain);
  w.num(m.temp_min);
  w.num(m.temp_max);
  w.num(m.current_limit);
  w.num(m.ambient);
  w.num(m.hysteresis);
  std::string idx;
  for (std::size_t i = 0; i < m.central_indices.size(); ++i) {
    if (i) idx += ' ';
    idx += std::to_string(m.central_indices[i]);
  }
  w.text(idx);
  w.end();
}

MappingConfig read_mapping_line(std::string_view line, std::size_t line_no) {
  RowReader r(line, line_no);
  if (r.next() != "# mapping") throw ConfigError("session log: missing mapping line");
  MappingConfig m;
  m.force_threshold = r.real();
  m.current_per_force = r.real();
  m.pressure_gain = r.real();
  m.temp_min = r.real();
  m.temp_max = r.real();
  m.current_limit = r.real();
  m.ambient = r.real();
  m.hysteresis = r.real();
  std::vector<std::string> parts;
  std::string idx(r.next());
  boost::split(parts, idx, boost::is_any_of(" "), boost::token_compress_on);
  m.central_indices.clear();
  for (const auto& p : parts) {
    if (!p.empty()) m.central_indices.push_back(std::stoul(p));
  }
  r.finish();
  m.validate();
  return m;
}

void write_row(RowWriter& w, const TickRecord& rec) {
  const auto& l = rec.leader;
  const auto& f = rec.follower;
  w.num(l.tick);
  w.num(l.time);
  w.num(static_cast<std::uint64_t>(l.trial));
  w.text(to_string(l.link));
  w.flag(l.has_sensor);
  w.nums(l.leader_closure);
  w.nums(l.sensor.contact_force);
  w.nums(l.sensor.palm_temps);
  w.num(l.sensor.timestamp);
  w.num(static_cast<std::uint64_t>(l.command.sequence));
  w.nums(l.command.motor_current);
  w.nums(l.command.pwm_duty);
  w.num(l.command.palm_setpoint);
  w.nums(l.torque);
  w.nums(l.pressure);
  w.num(l.glove_temp);
  w.num(l.thermo_voltage);
  w.nums(l.felt_force);
  w.flag(f.has_pose);
  w.flag(f.object_present);
  w.num(f.rx_index_angle);
  w.nums(f.targets);
  w.nums(f.penetration);
  w.nums(f.force);
  w.num(f.grip);
  w.num(f.tilt);
  w.num(f.spilled);
  w.num(f.remaining);
  w.flag(f.dropped);
  w.num(f.object_temp);
  w.num(f.palm_center_temp);
  w.end();
}

TickRecord read_row(std::string_view line, std::size_t line_no) {
  RowReader r(line, line_no);
  TickRecord rec;
  auto& l = rec.leader;
  auto& f = rec.follower;
  l.tick = r.integer();
  f.tick = l.tick;
  l.time = r.real();
  l.trial = static_cast<std::uint32_t>(r.integer());
  f.trial = l.trial;
  const auto link = r.next();
  if (link == "LIVE") {
    l.link = LinkState::Live;
  } else if (link == "LOST") {
    l.link = LinkState::Lost;
  } else {
    throw ConfigError("session log line " + std::to_string(line_no) + ": bad link state");
  }
  l.has_sensor = r.flag();
  r.reals(l.leader_closure);
  r.reals(l.sensor.contact_force);
  r.reals(l.sensor.palm_temps);
  l.sensor.timestamp = r.real();
  l.command.sequence = static_cast<std::uint32_t>(r.integer());
  r.reals(l.command.motor_current);
  r.reals(l.command.pwm_duty);
  l.command.palm_setpoint = r.real();
  r.reals(l.torque);
  r.reals(l.pressure);
  l.glove_temp = r.real();
  l.thermo_voltage = r.real();
  r.reals(l.felt_force);
  f.has_pose = r.flag();
  f.object_present = r.flag();
  f.rx_index_angle = r.real();
  r.reals(f.targets);
  r.reals(f.penetration);
  r.reals(f.force);
  f.grip = r.real();
  f.tilt = r.real();
  f.spilled = r.real();
  f.remaining = r.real();
  f.dropped = r.flag();
  f.object_temp = r.real();
  f.palm_center_temp = r.real();
  r.finish();
  return rec;
}

}  // namespace

std::string session_log_csv(const SessionLog& log) {
  std::string out;
  out.reserve(64 + log.records.size() * 1400);
  out += kLogMagic;
  out += " scenario=";
  out += log.scenario_name;
  out += '\n';
  write_mapping_line(out, log.mapping);
  out += header_row();
  out += '\n';
  RowWriter w(out);
  for (const auto& rec : log.records) write_row(w, rec);
  return out;
}

SessionLog parse_session_log(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::size_t line_no = 0;
  SessionLog log;

  if (!std::getline(in, line) || !line.starts_with(kLogMagic)) {
    throw ConfigError("not a session log (missing header)");
  }
  ++line_no;
  const auto pos = line.find(" scenario=");
  if (pos != std::string::npos) log.scenario_name = line.substr(pos + 10);

  if (!std::getline(in, line)) throw ConfigError("session log: missing mapping line");
  log.mapping = read_mapping_line(line, ++line_no);

  if (!std::getline(in, line) || line != header_row()) {
    throw ConfigError("session log: unexpected column header");
  }
  ++line_no;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    TickRecord rec = read_row(line, line_no);
    if (rec.leader.tick != log.records.size()) {
      throw ConfigError("session log line " + std::to_string(line_no) + ": ticks not contiguous");
    }
    log.records.push_back(rec);
  }
  return log;
}

void write_session_log(const SessionLog& log, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write session log: " + path);
  out << session_log_csv(log);
  if (!out) throw ConfigError("failed writing session log: " + path);
}

SessionLog read_session_log(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read session log: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_session_log(ss.str());
}

std::string step_log_csv(const SessionLog& log) {
  std::string out = "t_s,grip_N,duty,current_mA,temp_C,spilled_g\n";
  RowWriter w(out);
  for (const auto& rec : log.records) {
    double duty = 0.0;
    double current = 0.0;
    for (std::size_t f = 0; f < kFingers; ++f) {
      duty += rec.leader.command.pwm_duty[f];
      current += rec.leader.command.motor_current[f];
    }
    w.num(rec.leader.time);
    w.num(rec.follower.grip);
    w.num(duty / kFingers);
    w.num(current / kFingers);
    w.num(rec.leader.glove_temp);
    w.num(rec.follower.spilled);
    w.end();
  }
  return out;
}

}  // namespace mfe
