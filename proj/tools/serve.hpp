#pragma once

#include <string>

#include "mfe/session.hpp"

namespace mfe::cli {

struct ServeOptions {
  std::string host = "127.0.0.1";
  unsigned short port = 8080;
  std::string static_dir;
  std::string scenario_dir;  // extra *.ini scenarios selectable by file stem
  SessionConfig base;        // mapping, geometry, link and starting scenario
  double snapshot_hz = 20.0;
  double max_ticks = 0.0;    // stop after this many ticks, 0 = run until killed
};

int serve(const ServeOptions& opts);

}  // namespace mfe::cli
