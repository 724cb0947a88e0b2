// Wall-clock paced live session: static console assets over HTTP and JSON
// telemetry/input on the /ws websocket, all on one single-threaded io_context.

#include "serve.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "mfe/errors.hpp"
#include "mfe/live.hpp"

namespace mfe::cli {

namespace {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace fs = std::filesystem;
using tcp = asio::ip::tcp;

constexpr double kInputHz = 20.0;

std::string mime_type(const fs::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".html") return "text/html; charset=utf-8";
  if (ext == ".js") return "text/javascript; charset=utf-8";
  if (ext == ".css") return "text/css; charset=utf-8";
  if (ext == ".json") return "application/json";
  if (ext == ".md") return "text/markdown; charset=utf-8";
  if (ext == ".svg") return "image/svg+xml";
  return "application/octet-stream";
}

class Hub;

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket socket, Hub& hub) : ws_(std::move(socket)), hub_(hub) {}

  void start(http::request<http::string_body> req);
  void send(std::string text);

 private:
  void read();
  void write_next();

  websocket::stream<beast::tcp_stream> ws_;
  Hub& hub_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
};

class Hub {
 public:
  Hub(asio::io_context& io, const ServeOptions& opts)
      : io_(io), opts_(opts), timer_(io), live_(opts.base), limiter_(kInputHz) {
    period_ = std::chrono::microseconds(static_cast<long>(1e6 / opts.base.control_hz));
    snapshot_every_ = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(opts.base.control_hz / opts.snapshot_hz));
  }

  void start() {
    start_ = std::chrono::steady_clock::now();
    next_ = start_;
    schedule();
  }

  void join(const std::shared_ptr<WsSession>& s) {
    sessions_.insert(s);
    s->send(hello().dump());
    s->send(telemetry_json(live_.last(), live_.config()).dump());
  }

  void leave(const std::shared_ptr<WsSession>& s) { sessions_.erase(s); }

  void on_message(const std::shared_ptr<WsSession>& from, const std::string& text) {
    try {
      const auto in = parse_console_input(text);
      if (in.session && *in.session != epoch_) {
        from->send(error("stale_session", "session restarted; reconnect to resync").dump());
        return;
      }
      switch (in.kind) {
        case ConsoleInput::Kind::Closure:
          limiter_.submit(elapsed(), in.closure);
          break;
        case ConsoleInput::Kind::Release:
          live_.clear_manual();
          break;
        case ConsoleInput::Kind::Scenario:
          live_.switch_scenario(lookup(in.scenario));
          live_.clear_manual();
          ++epoch_;
          broadcast(hello().dump());
          break;
      }
    } catch (const std::exception& e) {
      from->send(error("bad_request", e.what()).dump());
    }
  }

 private:
  double elapsed() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

  nlohmann::json hello() const {
    nlohmann::json j;
    j["type"] = "hello";
    j["schema"] = kConsoleSchemaVersion;
    j["protocol_version"] = kProtocolVersion;
    j["session"] = epoch_;
    j["scenario"] = live_.config().scenario.name;
    j["scenarios"] = scenario_names();
    j["control_hz"] = live_.config().control_hz;
    j["snapshot_hz"] = opts_.snapshot_hz;
    j["input_hz"] = kInputHz;
    j["quantum_deg"] = kEncoderQuantumDeg;
    j["heartbeat_ms"] = live_.config().watchdog_timeout_ms;
    return j;
  }

  static nlohmann::json error(const std::string& code, const std::string& message) {
    return {{"type", "error"}, {"schema", kConsoleSchemaVersion}, {"code", code}, {"message", message}};
  }

  std::vector<std::string> scenario_names() const {
    auto names = builtin_scenario_names();
    std::error_code ec;
    if (!opts_.scenario_dir.empty() && fs::is_directory(opts_.scenario_dir, ec)) {
      std::vector<std::string> files;
      for (const auto& e : fs::directory_iterator(opts_.scenario_dir)) {
        if (e.path().extension() != ".ini") continue;
        // files that mirror a built-in (task2_cup.ini vs task2-cup) are listed once
        auto stem = e.path().stem().string();
        auto dashed = stem;
        std::replace(dashed.begin(), dashed.end(), '_', '-');
        if (!builtin_scenario(dashed)) files.push_back(stem);
      }
      std::sort(files.begin(), files.end());
      names.insert(names.end(), files.begin(), files.end());
    }
    return names;
  }

  Scenario lookup(const std::string& name) const {
    if (auto s = builtin_scenario(name)) return *s;
    if (name.find('/') != std::string::npos || name.find("..") != std::string::npos) {
      throw ConfigError("bad scenario name");
    }
    const auto path = fs::path(opts_.scenario_dir) / (name + ".ini");
    if (!fs::exists(path)) throw ConfigError("unknown scenario '" + name + "'");
    return load_scenario(path.string());
  }

  void broadcast(const std::string& text) {
    for (const auto& s : sessions_) s->send(text);
  }

  void schedule() {
    next_ += period_;
    timer_.expires_at(next_);
    timer_.async_wait([this](beast::error_code ec) {
      if (ec) return;
      on_tick();
      if (opts_.max_ticks > 0 && static_cast<double>(live_.tick()) >= opts_.max_ticks) {
        io_.stop();
        return;
      }
      schedule();
    });
  }

  void on_tick() {
    if (auto input = limiter_.poll(elapsed())) live_.set_manual(*input);
    try {
      const auto& rec = live_.step();
      if (rec.leader.tick % snapshot_every_ == 0) broadcast(telemetry_json(rec, live_.config()).dump());
    } catch (const std::exception& e) {
      // a plant fault ends this run; restart the scenario and tell the console
      broadcast(error("session_fault", e.what()).dump());
      live_.switch_scenario(live_.config().scenario);
      ++epoch_;
      broadcast(hello().dump());
    }
  }

  asio::io_context& io_;
  const ServeOptions& opts_;
  asio::steady_timer timer_;
  LiveSession live_;
  InputRateLimiter limiter_;
  std::set<std::shared_ptr<WsSession>> sessions_;
  std::chrono::steady_clock::time_point start_;
  std::chrono::steady_clock::time_point next_;
  std::chrono::microseconds period_{10000};
  std::uint64_t snapshot_every_ = 5;
  std::uint64_t epoch_ = 0;
};

void WsSession::start(http::request<http::string_body> req) {
  ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
  ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
    if (ec) return;
    self->hub_.join(self);
    self->read();
  });
}

void WsSession::read() {
  ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
    if (ec) {
      self->hub_.leave(self);
      return;
    }
    const std::string text = beast::buffers_to_string(self->buffer_.data());
    self->buffer_.consume(self->buffer_.size());
    self->hub_.on_message(self, text);
    self->read();
  });
}

void WsSession::send(std::string text) {
  // a slow client only ever sees the newest snapshots
  // front() is in flight, never drop it
  if (queue_.size() > 64) queue_.erase(queue_.begin() + 1);
  queue_.push_back(std::move(text));
  if (queue_.size() == 1) write_next();
}

void WsSession::write_next() {
  ws_.text(true);
  ws_.async_write(asio::buffer(queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
    if (ec) {
      self->hub_.leave(self);
      return;
    }
    self->queue_.pop_front();
    if (!self->queue_.empty()) self->write_next();
  });
}

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket socket, Hub& hub, const ServeOptions& opts)
      : stream_(std::move(socket)), hub_(hub), opts_(opts) {}

  void run() { read(); }

 private:
  void read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return;
      self->handle();
    });
  }

  void handle() {
    if (websocket::is_upgrade(req_)) {
      if (req_.target() != "/ws") return reply(http::status::not_found, "text/plain", "websocket lives at /ws\n");
      stream_.expires_never();
      std::make_shared<WsSession>(stream_.release_socket(), hub_)->start(std::move(req_));
      return;
    }
    if (req_.method() != http::verb::get && req_.method() != http::verb::head) {
      return reply(http::status::method_not_allowed, "text/plain", "GET only\n");
    }
    std::string target(req_.target());
    if (const auto q = target.find('?'); q != std::string::npos) target.resize(q);
    if (target.empty() || target.back() == '/') target += "index.html";
    if (target.find("..") != std::string::npos) return reply(http::status::bad_request, "text/plain", "bad path\n");
    const fs::path path = fs::path(opts_.static_dir) / target.substr(1);
    std::ifstream in(path, std::ios::binary);
    if (!in) return reply(http::status::not_found, "text/plain", "not found\n");
    std::ostringstream body;
    body << in.rdbuf();
    reply(http::status::ok, mime_type(path), body.str());
  }

  void reply(http::status status, const std::string& type, std::string body) {
    auto res = std::make_shared<http::response<http::string_body>>(status, req_.version());
    res->set(http::field::server, "mfe");
    res->set(http::field::content_type, type);
    res->set(http::field::cache_control, "no-store");
    res->keep_alive(req_.keep_alive());
    if (req_.method() != http::verb::head) res->body() = std::move(body);
    res->prepare_payload();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
      if (ec || !res->keep_alive()) {
        beast::error_code ignored;
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
        return;
      }
      self->read();
    });
  }

  beast::tcp_stream stream_;
  Hub& hub_;
  const ServeOptions& opts_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
};

void accept(tcp::acceptor& acceptor, Hub& hub, const ServeOptions& opts) {
  acceptor.async_accept([&](beast::error_code ec, tcp::socket socket) {
    if (!ec) std::make_shared<HttpSession>(std::move(socket), hub, opts)->run();
    accept(acceptor, hub, opts);
  });
}

}  // namespace

int serve(const ServeOptions& opts) {
  asio::io_context io(1);
  tcp::acceptor acceptor(io);
  const tcp::endpoint ep(asio::ip::make_address(opts.host), opts.port);
  acceptor.open(ep.protocol());
  acceptor.set_option(asio::socket_base::reuse_address(true));
  acceptor.bind(ep);
  acceptor.listen();

  Hub hub(io, opts);
  asio::signal_set signals(io, SIGINT, SIGTERM);
  signals.async_wait([&](beast::error_code, int) { io.stop(); });

  accept(acceptor, hub, opts);
  hub.start();
  std::cerr << "mfe serve: http://" << opts.host << ":" << acceptor.local_endpoint().port() << "/ (ws at /ws)\n";
  io.run();
  return 0;
}

}  // namespace mfe::cli
