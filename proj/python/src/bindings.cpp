// Python surface over the C++ core.  JSON-shaped results cross as strings
// and are decoded by the mfe package.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mfe/characterize.hpp"
#include "mfe/errors.hpp"
#include "mfe/kinematics.hpp"
#include "mfe/live.hpp"
#include "mfe/mapping.hpp"
#include "mfe/protocol.hpp"
#include "mfe/scenario.hpp"
#include "mfe/session.hpp"

namespace py = pybind11;
using namespace mfe;

namespace {

MappingConfig mapping(std::optional<double> force_threshold, std::optional<double> pressure_gain,
                      std::optional<double> current_limit) {
  MappingConfig cfg;
  if (force_threshold) cfg.force_threshold = *force_threshold;
  if (pressure_gain) cfg.pressure_gain = *pressure_gain;
  if (current_limit) cfg.current_limit = *current_limit;
  cfg.validate();
  return cfg;
}

FingerAngles angles_from(const std::vector<double>& v) {
  if (v.size() != kJointsPerFinger) throw DomainError("need 4 joint angles");
  return {v[0], v[1], v[2], v[3]};
}

py::bytes to_bytes(const Bytes& b) { return {reinterpret_cast<const char*>(b.data()), b.size()}; }

Bytes from_bytes(const py::bytes& b) {
  const std::string s = b;
  return {s.begin(), s.end()};
}

}  // namespace

PYBIND11_MODULE(_mfe, m) {
  m.doc() = "Multimodal haptic teleoperation core";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<SingularityError>(m, "SingularityError", PyExc_ArithmeticError);
  py::register_exception<SensorFault>(m, "SensorFault", PyExc_ValueError);
  py::register_exception<SessionError>(m, "SessionError", PyExc_RuntimeError);

  m.attr("ENCODER_QUANTUM_DEG") = kEncoderQuantumDeg;
  m.attr("PROTOCOL_VERSION") = kProtocolVersion;
  m.attr("CONSOLE_SCHEMA_VERSION") = kConsoleSchemaVersion;

  // kinematics
  m.def("rest_pose", [] {
    const auto p = rest_pose();
    return std::vector<double>(p.begin(), p.end());
  });
  m.def("forward_kinematics", [](const std::vector<double>& angles) {
    const auto p = forward_kinematics(default_geometry(), angles_from(angles)).position;
    return std::vector<double>{p.x(), p.y(), p.z()};
  }, py::arg("angles"));
  m.def("fingertip_force", [](const std::vector<double>& angles, double torque) {
    return fingertip_force(default_geometry(), angles_from(angles), torque);
  }, py::arg("angles"), py::arg("torque"));
  m.def("workspace_force_range", [](double torque, std::size_t grid) {
    const auto r = workspace_force_range(default_geometry(), torque, grid);
    return std::pair{r.min_force, r.max_force};
  }, py::arg("torque"), py::arg("grid") = kDefaultWorkspaceGrid);
  m.def("quantize_encoder", &quantize_encoder, py::arg("angle"));

  // mapping
  m.def("force_to_current", [](double f, std::optional<double> ft, std::optional<double> k, std::optional<double> lim) {
    return force_to_current(f, mapping(ft, k, lim));
  }, py::arg("force"), py::kw_only(), py::arg("force_threshold") = py::none(),
     py::arg("pressure_gain") = py::none(), py::arg("current_limit") = py::none());
  m.def("pressure_duty", [](double f, std::optional<double> ft, std::optional<double> k, std::optional<double> lim) {
    return pressure_duty(f, mapping(ft, k, lim));
  }, py::arg("force"), py::kw_only(), py::arg("force_threshold") = py::none(),
     py::arg("pressure_gain") = py::none(), py::arg("current_limit") = py::none());
  m.def("palm_setpoint", [](const std::vector<double>& temps) {
    if (temps.size() != kPalmSensors) throw DomainError("need 27 palm temperatures");
    SensorFrame frame;
    std::copy(temps.begin(), temps.end(), frame.palm_temps.begin());
    return palm_setpoint(frame, MappingConfig{});
  }, py::arg("temps"));

  // protocol
  m.def("crc32", [](const py::bytes& b) { return crc32_ieee(from_bytes(b)); });
  m.def("encode_heartbeat", [](std::uint32_t seq, std::uint64_t ts) { return to_bytes(encode(make_heartbeat(seq, ts))); },
        py::arg("sequence"), py::arg("timestamp_us"));
  m.def("decode", [](const py::bytes& b) -> py::dict {
    const auto r = decode(from_bytes(b));
    if (auto* err = std::get_if<DecodeError>(&r)) throw DomainError(std::string(to_string(*err)));
    const auto& f = std::get<Frame>(r);
    py::dict d;
    d["kind"] = std::string(to_string(f.kind));
    d["sequence"] = f.sequence;
    d["timestamp_us"] = f.timestamp_us;
    d["payload"] = to_bytes(f.payload);
    return d;
  }, py::arg("datagram"));

  // plants
  m.def("characterize_fluidic_csv", &characterize_fluidic_csv, py::arg("voltages"), py::arg("duration_s") = 2.0);
  m.def("characterize_thermo_csv", &characterize_thermo_csv, py::arg("voltages"), py::arg("duration_s") = 15.0,
        py::arg("setpoint") = py::none());

  // sessions
  m.def("builtin_scenario_names", &builtin_scenario_names);
  m.def("run_session", [](const std::string& scenario, std::optional<double> duration, std::optional<std::uint64_t> seed,
                          bool split, const std::string& log_path) {
    auto cfg = SessionConfig::for_scenario(resolve_scenario(scenario));
    cfg.duration = duration;
    if (seed) cfg.link.seed = *seed;
    cfg.mode = split ? SessionMode::Split : SessionMode::Combined;
    cfg.log_path = log_path;
    SessionResult r;
    {
      py::gil_scoped_release release;
      r = run_session(cfg);
    }
    return std::pair{r.summary.to_json().dump(), session_log_csv(r.log)};
  }, py::arg("scenario"), py::arg("duration") = py::none(), py::arg("seed") = py::none(),
     py::arg("split") = false, py::arg("log_path") = "");
  m.def("replay_csv", [](const std::string& csv, std::optional<double> ft) {
    const auto log = parse_session_log(csv);
    std::optional<MappingConfig> override_cfg;
    if (ft) {
      override_cfg = log.mapping;
      override_cfg->force_threshold = *ft;
      override_cfg->validate();
    }
    return replay(log, override_cfg).to_json().dump();
  }, py::arg("csv"), py::arg("force_threshold") = py::none());
}
