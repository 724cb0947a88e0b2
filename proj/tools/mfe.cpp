// mfe command line: characterize, workspace, run, replay, serve.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "mfe/characterize.hpp"
#include "mfe/errors.hpp"
#include "mfe/kinematics.hpp"
#include "mfe/scenario.hpp"
#include "mfe/session.hpp"
#include "serve.hpp"

#ifndef MFE_WEB_DIR
#define MFE_WEB_DIR "web"
#endif
#ifndef MFE_SCENARIO_DIR
#define MFE_SCENARIO_DIR "scenarios"
#endif

namespace {

using namespace mfe;

constexpr int kExitError = 1;
constexpr int kExitSafety = 2;
constexpr int kExitDivergence = 3;

struct MappingFlags {
  std::string config;
  std::optional<double> force_threshold;
  std::optional<double> pressure_gain;
  std::optional<double> current_limit;

  void add(CLI::App* app) {
    app->add_option("--config", config, "INI file with [geometry] and [mapping] sections")->check(CLI::ExistingFile);
    app->add_option("--force-threshold", force_threshold, "dead-zone force F_t (N)");
    app->add_option("--pressure-gain", pressure_gain, "fingertip pressure gain k");
    app->add_option("--current-limit", current_limit, "motor current limit (mA)");
  }

  std::optional<MappingConfig> mapping() const {
    if (config.empty() && !force_threshold && !pressure_gain && !current_limit) return std::nullopt;
    MappingConfig m = config.empty() ? MappingConfig{} : load_mapping_config(config);
    if (force_threshold) m.force_threshold = *force_threshold;
    if (pressure_gain) m.pressure_gain = *pressure_gain;
    if (current_limit) m.current_limit = *current_limit;
    m.validate();
    return m;
  }

  void apply(SessionConfig& cfg) const {
    if (!config.empty()) cfg.geometry = load_hand_geometry(config);
    if (auto m = mapping()) cfg.mapping = *m;
  }
};

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
}

std::vector<double> or_default(std::vector<double> v, std::vector<double> fallback) {
  return v.empty() ? fallback : v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multimodal haptic teleoperation stack"};
  app.require_subcommand(1);

  // characterize
  auto* ch = app.add_subcommand("characterize", "plant step responses as CSV");
  std::string device;
  std::vector<double> voltages;
  double ch_duration = 0.0;
  std::optional<double> setpoint;
  double current_step = 50.0;
  std::string ch_out;
  ch->add_option("device", device, "motor | fluidic | thermo")->required()->check(
      CLI::IsMember({"motor", "fluidic", "thermo"}));
  ch->add_option("--voltage", voltages, "drive voltages (repeatable)");
  ch->add_option("--duration", ch_duration, "seconds per step (default 2 fluidic, 15 thermo)");
  ch->add_option("--setpoint", setpoint, "thermo: closed-loop PID step to this temperature");
  ch->add_option("--current-step", current_step, "motor: sweep step in mA");
  ch->add_option("-o,--out", ch_out, "output CSV (default stdout)");

  // workspace
  auto* ws = app.add_subcommand("workspace", "force transmission over the joint-limit grid");
  double torque = 0.52;
  std::size_t grid = kDefaultWorkspaceGrid;
  std::string ws_out;
  std::string ws_config;
  ws->add_option("--torque", torque, "actuated joint torque (Nm)");
  ws->add_option("--grid", grid, "samples per joint")->check(CLI::Range(2, 200));
  ws->add_option("--config", ws_config, "INI file with a [geometry] section")->check(CLI::ExistingFile);
  ws->add_option("-o,--out", ws_out, "output CSV (default stdout)");

  // run
  auto* run = app.add_subcommand("run", "headless session on the logical clock");
  std::string scenario;
  bool split = false;
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
  std::optional<double> drop;
  std::optional<double> latency;
  std::uint16_t leader_port = 0;
  std::uint16_t follower_port = 0;
  std::string log_path;
  std::string summary_path;
  std::string step_log_path;
  std::string wire_log_path;
  MappingFlags run_flags;
  run->add_option("--scenario", scenario, "scenario INI file or built-in name")->required();
  run->add_flag("--split", split, "leader and follower in separate processes over UDP");
  run->add_option("--seed", seed, "link model seed");
  run->add_option("--duration", duration, "seconds (default: whole scenario)");
  run->add_option("--drop", drop, "frame drop probability");
  run->add_option("--latency", latency, "one-way latency (ms)");
  run->add_option("--leader-port", leader_port, "split mode leader UDP port (0 = ephemeral)");
  run->add_option("--follower-port", follower_port, "split mode follower UDP port (0 = ephemeral)");
  run->add_option("--log", log_path, "session log CSV");
  run->add_option("--summary", summary_path, "summary JSON (default stdout)");
  run->add_option("--step-log", step_log_path, "t_s,grip_N,duty,current_mA,temp_C,spilled_g CSV");
  run->add_option("--wire-log", wire_log_path, "binary record of every datagram");
  run_flags.add(run);

  // replay
  auto* rp = app.add_subcommand("replay", "recompute commands from a session log");
  std::string replay_log;
  MappingFlags replay_flags;
  rp->add_option("log", replay_log, "session log CSV")->required()->check(CLI::ExistingFile);
  replay_flags.add(rp);

  // serve
  auto* sv = app.add_subcommand("serve", "live session with the browser console");
  cli::ServeOptions serve_opts;
  serve_opts.static_dir = MFE_WEB_DIR;
  serve_opts.scenario_dir = MFE_SCENARIO_DIR;
  std::string serve_scenario = "task1-stiffness";
  MappingFlags serve_flags;
  sv->add_option("--port", serve_opts.port, "HTTP/websocket port")->required();
  sv->add_option("--host", serve_opts.host, "bind address");
  sv->add_option("--static", serve_opts.static_dir, "console asset directory");
  sv->add_option("--scenario-dir", serve_opts.scenario_dir, "directory of selectable scenario files");
  sv->add_option("--scenario", serve_scenario, "starting scenario");
  sv->add_option("--max-ticks", serve_opts.max_ticks, "exit after this many ticks (0 = never)");
  serve_flags.add(sv);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ch) {
      std::string csv;
      if (device == "motor") {
        csv = characterize_motor_csv(current_step);
      } else if (device == "fluidic") {
        csv = characterize_fluidic_csv(or_default(voltages, {50.0, 100.0, 150.0, 200.0}),
                                       ch_duration > 0 ? ch_duration : 2.0);
      } else {
        csv = characterize_thermo_csv(or_default(voltages, {5.0, -5.0}), ch_duration > 0 ? ch_duration : 15.0,
                                      setpoint);
      }
      write_text(ch_out, csv);
      return 0;
    }

    if (*ws) {
      const auto geom = ws_config.empty() ? default_geometry() : load_hand_geometry(ws_config)[1];
      const auto samples = workspace_sweep(geom, torque, grid);
      write_text(ws_out, workspace_csv(samples));
      const auto range = workspace_force_range(geom, torque, grid);
      std::cerr << "force range " << range.min_force << " .. " << range.max_force << " N over "
                << range.poses_evaluated << " poses\n";
      return 0;
    }

    if (*run) {
      auto cfg = SessionConfig::for_scenario(resolve_scenario(scenario));
      run_flags.apply(cfg);
      if (seed) cfg.link.seed = *seed;
      if (drop) cfg.link.drop_probability = *drop;
      if (latency) cfg.link.latency_ms = *latency;
      cfg.duration = duration;
      cfg.mode = split ? SessionMode::Split : SessionMode::Combined;
      cfg.leader_port = leader_port;
      cfg.follower_port = follower_port;
      cfg.log_path = log_path;
      cfg.wire_log_path = wire_log_path;
      SessionResult result;
      try {
        result = run_session(cfg);
      } catch (const SessionError& e) {
        std::cerr << "mfe: " << e.what() << "\n";
        if (!log_path.empty()) std::cerr << "mfe: partial log written to " << log_path << "\n";
        return kExitError;
      }
      if (!step_log_path.empty()) write_text(step_log_path, step_log_csv(result.log));
      write_text(summary_path, result.summary.to_json().dump(2) + "\n");
      if (result.summary.safety_violations > 0) {
        std::cerr << "mfe: " << result.summary.safety_violations << " safety violations\n";
        return kExitSafety;
      }
      return 0;
    }

    if (*rp) {
      const auto log = read_session_log(replay_log);
      const auto report = replay(log, replay_flags.mapping());
      std::cout << report.to_json().dump(2) << "\n";
      if (!report.ok()) {
        std::cerr << "mfe: replay diverged at tick " << *report.first_divergent_tick << "\n";
        return kExitDivergence;
      }
      if (report.safety_violations > 0) return kExitSafety;
      return 0;
    }

    if (*sv) {
      serve_opts.base = SessionConfig::for_scenario(resolve_scenario(serve_scenario));
      serve_flags.apply(serve_opts.base);
      return cli::serve(serve_opts);
    }
  } catch (const std::exception& e) {
    std::cerr << "mfe: " << e.what() << "\n";
    return kExitError;
  }
  return 0;
}
