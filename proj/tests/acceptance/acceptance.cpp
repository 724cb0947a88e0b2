// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mfe/session.hpp"

using namespace mfe;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::vector<SessionLog> g_logs;  // every session log produced by the suite

bool run(const char* name, double budget_s, const std::function<void(Outcome&)>& body) {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(out);
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail << " [exception: " << e.what() << "]";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > budget_s) {
    out.pass = false;
    out.detail << " [over budget " << budget_s << " s]";
  }
  std::printf("%s %-22s %7.3fs %s\n", out.pass ? "PASS" : "FAIL", name, secs, out.detail.str().c_str());
  std::fflush(stdout);
  return out.pass;
}

bool within(double value, double target, double rel) { return std::abs(value - target) <= rel * std::abs(target); }

std::uint32_t crc32_bitwise(std::span<const std::uint8_t> data) {
  std::uint32_t crc = 0xFFFFFFFFu;
  for (auto byte : data) {
    crc ^= byte;
    for (int bit = 0; bit < 8; ++bit) crc = (crc >> 1) ^ (0xEDB88320u & (0u - (crc & 1u)));
  }
  return ~crc;
}

SessionResult session(SessionConfig cfg) {
  auto r = run_session(cfg);
  g_logs.push_back(r.log);
  return r;
}

void rest_pose_force(Outcome& o) {
  const double f = fingertip_force(default_geometry(), rest_pose(), 0.52);
  o.detail << "F=" << f << " N";
  o.check(within(f, 4.5, 0.05), "4.5 N +-5%");
}

void workspace_range(Outcome& o) {
  const auto g = default_geometry();
  const auto r = workspace_force_range(g, 0.52);
  const auto b = workspace_force_range(g, 0.03);
  o.detail << "range=(" << r.min_force << ", " << r.max_force << ") N back-drive=" << b.max_force << " N";
  o.check(within(r.min_force, 3.55, 0.10), "min 3.55 +-10%");
  o.check(within(r.max_force, 8.18, 0.10), "max 8.18 +-10%");
  o.check(within(b.max_force, 0.5, 0.10), "back-drive 0.5 +-10%");
}

void mapping_exactness(Outcome& o) {
  const MappingConfig cfg;
  o.check(force_to_current(6000.0, cfg) == 1750.0, "6000 -> 1750 mA");
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> force(0.0, 8000.0);
  std::uniform_real_distribution<double> near(0.0, 3.0);
  std::uniform_real_distribution<double> temp(-30.0, 100.0);
  std::size_t bad = 0;
  for (int i = 0; i < 100000; ++i) {
    const double f = (i & 1) ? near(rng) : force(rng);
    const double d = pressure_duty(f, cfg);
    const double c = force_to_current(f, cfg);
    if (f <= 1.47 && (d != 0.0 || c != 0.0)) ++bad;
    if (d < 0.0 || d > 1.0 || c < 0.0 || c > 1750.0) ++bad;
    SensorFrame frame;
    for (auto& t : frame.palm_temps) t = temp(rng);
    double sum = 0.0;
    for (auto k : cfg.central_indices) sum += frame.palm_temps[k];
    const double mean = sum / static_cast<double>(cfg.central_indices.size());
    const double sp = palm_setpoint(frame, cfg);
    if (mean >= 55.0 && sp != 55.0) ++bad;
    if (mean <= 10.0 && sp != 10.0) ++bad;
    if (sp < 10.0 || sp > 55.0) ++bad;
  }
  o.detail << "violations=" << bad << "/100000";
  o.check(bad == 0, "dead zone, clip and clamp");
}

void microfluidic(Outcome& o) {
  auto step = [](double volts, double& crossing) {
    MicrofluidicPlant p;
    p.drive_voltage = volts;
    double peak = 0.0;
    crossing = -1.0;
    for (int i = 1; i <= 3000; ++i) {
      const double before = p.pressure;
      p = step_microfluidic(p, kPlantDt);
      if (crossing < 0.0 && p.pressure >= 0.5) crossing = (i - 1 + (0.5 - before) / (p.pressure - before)) * kPlantDt;
      peak = std::max(peak, p.pressure);
    }
    return peak;
  };
  double crossing = 0.0;
  const double peak = step(200.0, crossing);
  const double protrusion = peak * kPeakProtrusionMm / kPeakPressureKpa;
  o.detail << "peak=" << peak << " kPa protrusion=" << protrusion << " mm t(0.5kPa)=" << crossing << " s";
  o.check(within(peak, 2.47, 0.02), "peak 2.47 +-2%");
  o.check(within(protrusion, 1.65, 0.02), "protrusion 1.65 +-2%");
  o.check(within(crossing, 0.1, 0.20), "crossing 0.1 s +-20%");
  double prev_peak = 0.0;
  double prev_os = 0.0;
  bool ordered = true;
  for (double v : {50.0, 100.0, 150.0, 200.0}) {
    double c = 0.0;
    const double pk = step(v, c);
    const double os = pk / MicrofluidicPlant{}.response(v).steady_gain - 1.0;
    ordered = ordered && pk > prev_peak && os > prev_os;
    prev_peak = pk;
    prev_os = os;
  }
  o.check(ordered, "gain and overshoot orderings");
}

void thermal_loop(Outcome& o) {
  double hot = 0.0;
  double cold = 0.0;
  for (double v : {5.0, -5.0}) {
    ThermoPlant p;
    p.drive_voltage = v;
    for (int i = 0; i < 15000; ++i) p = step_thermo(p, kPlantDt);
    (v > 0 ? hot : cold) = p.surface_temp;
  }
  ThermoPlant plant;
  PidController pid;
  double settle = -1.0;
  for (int i = 1; i <= 15000; ++i) {
    plant.drive_voltage = pid_step(pid, 40.0, plant.surface_temp, kPlantDt);
    plant = step_thermo(plant, kPlantDt);
    if (std::abs(plant.surface_temp - 40.0) > 1.0) {
      settle = -1.0;
    } else if (settle < 0.0) {
      settle = i * kPlantDt;
    }
  }
  o.detail << "+5V=" << hot << " C -5V=" << cold << " C settle(24->40)=" << settle << " s";
  o.check(std::abs(hot - 55.0) <= 1.0, "+5 V -> 55 C");
  o.check(std::abs(cold - 10.0) <= 1.0, "-5 V -> 10 C");
  o.check(settle >= 3.0 && settle <= 6.0, "settles in 3-6 s");
}

void protocol(Outcome& o) {
  std::mt19937_64 rng(5);
  const std::array<FrameKind, 4> kinds = {FrameKind::EncoderFrame, FrameKind::SensorFrame,
                                          FrameKind::HapticCommand, FrameKind::Heartbeat};
  std::size_t failures = 0;
  for (int i = 0; i < 100000; ++i) {
    Frame f;
    f.kind = kinds[rng() % 4];
    f.sequence = static_cast<std::uint32_t>(rng());
    f.timestamp_us = rng();
    f.payload.resize(payload_size(f.kind));
    for (auto& b : f.payload) b = static_cast<std::uint8_t>(rng());
    const auto back = decode(encode(f));
    if (!std::holds_alternative<Frame>(back) || std::get<Frame>(back) != f) ++failures;
  }
  o.check(failures == 0, "round-trip");

  const Bytes hb = encode(make_heartbeat(1, 0));
  const std::uint32_t crc = crc32_bitwise(std::span(hb).first(kHeaderSize));
  o.check(hb.size() == 22 && hb[18] == (crc & 0xFF) && hb[21] == (crc >> 24), "heartbeat wire image");

  JointState s;
  s.angles.assign(kFullDof, 0.25);
  const Bytes ref = encode(make_encoder_frame(s, 7, 70000));
  std::size_t accepted = 0;
  for (std::size_t bit = 0; bit < ref.size() * 8; ++bit) {
    Bytes bad = ref;
    bad[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    if (std::holds_alternative<Frame>(decode(bad))) ++accepted;
  }
  o.check(accepted == 0, "bit-flip rejection");

  std::size_t unsafe = 0;
  std::size_t lost_ticks = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto cfg = SessionConfig::for_scenario(builtin_cup_scenario(true));
    cfg.duration = 3.0;
    cfg.link.seed = rng();
    cfg.link.drop_probability = std::uniform_real_distribution<double>(0.0, 0.95)(rng);
    const int windows = static_cast<int>(rng() % 4);
    for (int w = 0; w < windows; ++w) {
      const double start = std::uniform_real_distribution<double>(0.0, 2.8)(rng);
      cfg.link.outages.push_back({start, start + std::uniform_real_distribution<double>(0.05, 0.8)(rng)});
    }
    const auto r = session(cfg);
    for (const auto& rec : r.log.records) {
      if (rec.leader.link != LinkState::Lost) continue;
      ++lost_ticks;
      if (!rec.leader.command.is_safe(cfg.mapping.ambient)) ++unsafe;
    }
  }
  o.detail << "round-trip failures=" << failures << " bit-flips accepted=" << accepted
           << " LOST ticks=" << lost_ticks << " unsafe=" << unsafe;
  o.check(lost_ticks > 0, "loss schedules exercise LOST");
  o.check(unsafe == 0, "SAFE on loss");
}

void scenario_oracles(Outcome& o) {
  const auto shape = session(SessionConfig::for_scenario(builtin_shape_scenario())).summary;
  const auto a60 = shape.trials[0].contact_onset_angle;
  const auto a80 = shape.trials[1].contact_onset_angle;
  o.check(a60 && a80, "contact in both shape trials");
  const double gap = (a60 && a80) ? (*a60 - *a80) / kEncoderQuantumRad : 0.0;
  o.detail << "onset gap=" << gap << " quanta";
  o.check(gap > 2.0, "onset gap > 2 quanta");

  const auto stiff = session(SessionConfig::for_scenario(builtin_stiffness_scenario()));
  const auto& st = stiff.summary.trials;
  const double k_soft = std::get<CompliantCube>(builtin_stiffness_scenario().trials[0].object).stiffness;
  const double k_hard = std::get<CompliantCube>(builtin_stiffness_scenario().trials[1].object).stiffness;
  o.check(st[0].penetration_at_target && st[1].penetration_at_target, "3 N reached on both cubes");
  if (st[0].penetration_at_target && st[1].penetration_at_target) {
    const double ratio = *st[0].penetration_at_target / *st[1].penetration_at_target;
    o.detail << " penetration ratio=" << ratio << " (k ratio " << k_hard / k_soft << ")";
    o.check(within(ratio, k_hard / k_soft, 0.05), "penetration ratio = inverse stiffness ratio");
  }

  const auto hold = session(SessionConfig::for_scenario(builtin_cup_scenario(true))).summary.trials[0];
  const auto blind = session(SessionConfig::for_scenario(builtin_cup_scenario(false))).summary.trials[0];
  o.detail << " cup spilled hold-band=" << hold.spilled << " g zero-feedback=" << blind.spilled
           << " g dropped=" << (blind.dropped ? "yes" : "no");
  o.check(hold.spilled == 0.0 && !hold.dropped, "hold-band spills nothing");
  o.check(blind.spilled > 0.0, "zero-feedback spills");

  const auto thermal = session(SessionConfig::for_scenario(builtin_thermal_scenario())).summary;
  std::vector<double> ranked;
  for (auto i : thermal.ranking) {
    ranked.push_back(std::get<WaterCup>(builtin_thermal_scenario().trials[i].object).water_temp);
  }
  o.detail << " ranking=(";
  for (std::size_t i = 0; i < ranked.size(); ++i) o.detail << (i ? "," : "") << ranked[i];
  o.detail << ")";
  o.check(ranked == std::vector<double>{60.0, 20.0, 4.0}, "ranking (60, 20, 4)");
  double worst = 0.0;
  for (const auto& t : thermal.trials) {
    const double target = std::clamp(t.object_temp, 10.0, 55.0);
    worst = std::max(worst, std::abs(t.settled_glove_temp.value_or(t.final_glove_temp) - target));
  }
  o.detail << " worst rendered error=" << worst << " C";
  o.check(worst <= 1.0, "rendered temps within 1 C of clamp targets");
}

void determinism(Outcome& o) {
  std::size_t divergences = 0;
  std::size_t violations = 0;
  for (const auto& log : g_logs) {
    const auto rep = replay(parse_session_log(session_log_csv(log)));
    divergences += rep.divergences;
    violations += rep.safety_violations;
  }
  auto cfg = SessionConfig::for_scenario(builtin_cup_scenario(true));
  cfg.link.jitter_ms = 0.0;
  cfg.link.drop_probability = 0.0;
  const auto combined = session_log_csv(run_session(cfg).log);
  cfg.mode = SessionMode::Split;
  const auto split = session_log_csv(run_session(cfg).log);
  o.detail << "logs=" << g_logs.size() << " divergences=" << divergences << " safety violations=" << violations
           << " split==combined " << (split == combined ? "yes" : "no") << " (" << combined.size() << " bytes)";
  o.check(!g_logs.empty(), "logs collected");
  o.check(divergences == 0, "replay zero divergences");
  o.check(violations == 0, "safety invariants");
  o.check(split == combined, "split matches combined byte-for-byte");
}

}  // namespace

int main() {
  bool ok = true;
  ok &= run("rest-pose-force", 1.0, rest_pose_force);
  ok &= run("workspace-range", 30.0, workspace_range);
  ok &= run("mapping-exactness", 5.0, mapping_exactness);
  ok &= run("microfluidic-plant", 5.0, microfluidic);
  ok &= run("thermal-loop", 10.0, thermal_loop);
  ok &= run("protocol", 30.0, protocol);
  ok &= run("scenario-oracles", 60.0, scenario_oracles);
  ok &= run("determinism-audit", 60.0, determinism);
  std::printf("%s\n", ok ? "ALL PASS" : "SOME CRITERIA FAILED");
  return ok ? 0 : 1;
}
