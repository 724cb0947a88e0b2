#include "mfe/protocol.hpp"

#include <algorithm>
#include <bit>
#include <cerrno>
#include <cmath>
#include <condition_variable>
#include <cstring>
#include <mutex>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>
#include <zlib.h>

#include "mfe/errors.hpp"

namespace mfe {

namespace {

void put_u16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(Bytes& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f32(Bytes& out, double v) { put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v))); }

std::uint64_t get_le(std::span<const std::uint8_t> b, std::size_t offset, std::size_t width) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(b[offset + i]) << (8 * i);
  return v;
}

double get_f32(std::span<const std::uint8_t> b, std::size_t offset) {
  return static_cast<double>(std::bit_cast<float>(static_cast<std::uint32_t>(get_le(b, offset, 4))));
}

bool known_kind(std::uint8_t k) { return k >= 0x01 && k <= 0x04; }

void require_payload(std::span<const std::uint8_t> payload, FrameKind kind) {
  if (payload.size() != payload_size(kind)) {
    throw DomainError(std::string(to_string(kind)) + " payload must be " +
                      std::to_string(payload_size(kind)) + " bytes");
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double unit_uniform(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

}  // namespace

std::size_t payload_size(FrameKind kind) {
  switch (kind) {
    case FrameKind::EncoderFrame:
      return kFullDof * 4;
    case FrameKind::SensorFrame:
      return (kFingers + kPalmSensors) * 4;
    case FrameKind::HapticCommand:
      return (2 * kFingers + 1) * 4;
    case FrameKind::Heartbeat:
      return 0;
  }
  return 0;
}

std::string_view to_string(FrameKind kind) {
  switch (kind) {
    case FrameKind::EncoderFrame:
      return "EncoderFrame";
    case FrameKind::SensorFrame:
      return "SensorFrame";
    case FrameKind::HapticCommand:
      return "HapticCommand";
    case FrameKind::Heartbeat:
      return "Heartbeat";
  }
  return "Unknown";
}

std::string_view to_string(DecodeError error) {
  switch (error) {
    case DecodeError::Truncated:
      return "Truncated";
    case DecodeError::BadCrc:
      return "BadCrc";
    case DecodeError::BadMagic:
      return "BadMagic";
    case DecodeError::BadVersion:
      return "BadVersion";
    case DecodeError::BadKind:
      return "BadKind";
    case DecodeError::BadPayload:
      return "BadPayload";
  }
  return "Unknown";
}

std::uint32_t crc32_ieee(std::span<const std::uint8_t> data) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  crc = ::crc32(crc, data.data(), static_cast<uInt>(data.size()));
  return static_cast<std::uint32_t>(crc);
}

Bytes encode(const Frame& frame) {
  if (frame.payload.size() > 0xFFFF) throw DomainError("payload exceeds 65535 bytes");
  Bytes out;
  out.reserve(kMinFrameSize + frame.payload.size());
  out.push_back(kMagic0);
  out.push_back(kMagic1);
  out.push_back(kProtocolVersion);
  out.push_back(static_cast<std::uint8_t>(frame.kind));
  put_u32(out, frame.sequence);
  put_u64(out, frame.timestamp_us);
  put_u16(out, static_cast<std::uint16_t>(frame.payload.size()));
  out.insert(out.end(), frame.payload.begin(), frame.payload.end());
  put_u32(out, crc32_ieee(out));
  return out;
}

DecodeResult decode(std::span<const std::uint8_t> bytes) {
  // Length and CRC are checked before the header fields so that any single
  // corrupted bit is reported as BadCrc (or Truncated for the length field).
  if (bytes.size() < kMinFrameSize) return DecodeError::Truncated;
  const std::size_t len = get_le(bytes, 16, 2);
  if (bytes.size() != kMinFrameSize + len) return DecodeError::Truncated;
  const auto body = bytes.first(kHeaderSize + len);
  if (crc32_ieee(body) != static_cast<std::uint32_t>(get_le(bytes, kHeaderSize + len, 4))) {
    return DecodeError::BadCrc;
  }
  if (bytes[0] != kMagic0 || bytes[1] != kMagic1) return DecodeError::BadMagic;
  if (bytes[2] != kProtocolVersion) return DecodeError::BadVersion;
  if (!known_kind(bytes[3])) return DecodeError::BadKind;
  Frame f;
  f.kind = static_cast<FrameKind>(bytes[3]);
  if (len != payload_size(f.kind)) return DecodeError::BadPayload;
  f.sequence = static_cast<std::uint32_t>(get_le(bytes, 4, 4));
  f.timestamp_us = get_le(bytes, 8, 8);
  f.payload.assign(bytes.begin() + kHeaderSize, bytes.begin() + kHeaderSize + len);
  return f;
}

Bytes encode_encoder_payload(const JointState& state) {
  if (!state.is_full()) throw DomainError("encoder payload needs the full 20-angle state");
  Bytes out;
  out.reserve(payload_size(FrameKind::EncoderFrame));
  for (double a : state.angles) put_f32(out, a);
  return out;
}

JointState decode_encoder_payload(std::span<const std::uint8_t> payload) {
  require_payload(payload, FrameKind::EncoderFrame);
  JointState s;
  s.angles.resize(kFullDof);
  for (std::size_t i = 0; i < kFullDof; ++i) s.angles[i] = get_f32(payload, 4 * i);
  return s;
}

Bytes encode_sensor_payload(const SensorFrame& frame) {
  Bytes out;
  out.reserve(payload_size(FrameKind::SensorFrame));
  for (double f : frame.contact_force) put_f32(out, f);
  for (double t : frame.palm_temps) put_f32(out, t);
  return out;
}

SensorFrame decode_sensor_payload(std::span<const std::uint8_t> payload) {
  require_payload(payload, FrameKind::SensorFrame);
  SensorFrame s;
  for (std::size_t i = 0; i < kFingers; ++i) s.contact_force[i] = get_f32(payload, 4 * i);
  for (std::size_t i = 0; i < kPalmSensors; ++i) {
    s.palm_temps[i] = get_f32(payload, 4 * (kFingers + i));
  }
  return s;
}

Bytes encode_command_payload(const HapticCommand& cmd) {
  Bytes out;
  out.reserve(payload_size(FrameKind::HapticCommand));
  for (double c : cmd.motor_current) put_f32(out, c);
  for (double d : cmd.pwm_duty) put_f32(out, d);
  put_f32(out, cmd.palm_setpoint);
  return out;
}

HapticCommand decode_command_payload(std::span<const std::uint8_t> payload) {
  require_payload(payload, FrameKind::HapticCommand);
  HapticCommand c;
  for (std::size_t i = 0; i < kFingers; ++i) c.motor_current[i] = get_f32(payload, 4 * i);
  for (std::size_t i = 0; i < kFingers; ++i) c.pwm_duty[i] = get_f32(payload, 4 * (kFingers + i));
  c.palm_setpoint = get_f32(payload, 4 * 2 * kFingers);
  return c;
}

Frame make_encoder_frame(const JointState& state, std::uint32_t sequence, std::uint64_t ts_us) {
  return {FrameKind::EncoderFrame, sequence, ts_us, encode_encoder_payload(state)};
}

Frame make_sensor_frame(const SensorFrame& frame, std::uint32_t sequence, std::uint64_t ts_us) {
  return {FrameKind::SensorFrame, sequence, ts_us, encode_sensor_payload(frame)};
}

Frame make_command_frame(const HapticCommand& cmd, std::uint64_t ts_us) {
  return {FrameKind::HapticCommand, cmd.sequence, ts_us, encode_command_payload(cmd)};
}

Frame make_heartbeat(std::uint32_t sequence, std::uint64_t ts_us) {
  return {FrameKind::Heartbeat, sequence, ts_us, {}};
}

// ---------------------------------------------------------------------------

void LinkModel::validate() const {
  if (!(latency_ms >= 0.0)) throw ConfigError("link latency must be >= 0");
  if (!(jitter_ms >= 0.0)) throw ConfigError("link jitter must be >= 0");
  if (!(drop_probability >= 0.0 && drop_probability < 1.0)) {
    throw ConfigError("drop probability must be in [0, 1)");
  }
  for (const auto& o : outages) {
    if (!(o.end >= o.start)) throw ConfigError("outage window must have end >= start");
  }
}

std::optional<std::uint64_t> LinkModel::deliver(Direction dir, std::uint32_t sequence,
                                                std::uint64_t send_us) const {
  const double send_s = static_cast<double>(send_us) * 1e-6;
  for (const auto& o : outages) {
    if (send_s >= o.start && send_s < o.end) return std::nullopt;
  }
  const std::uint64_t key =
      splitmix64(seed ^ splitmix64((static_cast<std::uint64_t>(dir) << 32) | sequence));
  if (drop_probability > 0.0 && unit_uniform(key) < drop_probability) return std::nullopt;
  double latency = latency_ms;
  if (jitter_ms > 0.0) latency += jitter_ms * (2.0 * unit_uniform(splitmix64(key)) - 1.0);
  latency = std::max(0.0, latency);
  return send_us + static_cast<std::uint64_t>(std::llround(latency * 1000.0));
}

LinkModel LinkModel::ideal() {
  LinkModel m;
  m.latency_ms = 0.0;
  m.jitter_ms = 0.0;
  return m;
}

std::string_view to_string(LinkState state) { return state == LinkState::Live ? "LIVE" : "LOST"; }

LinkState watchdog_step(double last_rx_age_ms, double timeout_ms) {
  return last_rx_age_ms > timeout_ms ? LinkState::Lost : LinkState::Live;
}

// ---------------------------------------------------------------------------

void FrameInbox::push(std::span<const std::uint8_t> datagram) {
  auto result = decode(datagram);
  auto* frame = std::get_if<Frame>(&result);
  if (!frame) {
    ++rejected_;
    return;
  }
  const auto due = link_.deliver(direction_, frame->sequence, frame->timestamp_us);
  if (!due) {
    ++dropped_;
    return;
  }
  pending_.push_back({std::move(*frame), *due});
}

std::vector<Frame> FrameInbox::poll(std::uint64_t now_us) {
  std::array<std::optional<Pending>, 5> best;
  std::vector<Pending> keep;
  for (auto& p : pending_) {
    if (p.due_us > now_us || p.frame.timestamp_us >= now_us) {
      keep.push_back(std::move(p));
      continue;
    }
    const auto k = static_cast<std::size_t>(p.frame.kind);
    const auto& newest = newest_[k];
    if (newest && p.frame.sequence <= *newest) {
      ++stale_;
      continue;
    }
    if (best[k] && best[k]->frame.sequence > p.frame.sequence) {
      ++stale_;
      continue;
    }
    if (best[k]) ++stale_;
    best[k] = std::move(p);
  }
  pending_ = std::move(keep);

  std::vector<Frame> out;
  for (std::size_t k = 0; k < best.size(); ++k) {
    if (!best[k]) continue;
    newest_[k] = best[k]->frame.sequence;
    last_rx_us_ = std::max(last_rx_us_.value_or(0), best[k]->due_us);
    out.push_back(std::move(best[k]->frame));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct SharedQueue {
  std::mutex mutex;
  std::condition_variable cv;
  std::deque<Bytes> items;
};

class LoopbackEndpoint : public Transport {
 public:
  LoopbackEndpoint(std::shared_ptr<SharedQueue> inbox, std::shared_ptr<SharedQueue> outbox)
      : inbox_(std::move(inbox)), outbox_(std::move(outbox)) {}

  void send(std::span<const std::uint8_t> datagram) override {
    {
      std::lock_guard lock(outbox_->mutex);
      outbox_->items.emplace_back(datagram.begin(), datagram.end());
    }
    outbox_->cv.notify_one();
  }

  std::optional<Bytes> receive(int timeout_ms) override {
    std::unique_lock lock(inbox_->mutex);
    if (!inbox_->cv.wait_for(lock, std::chrono::milliseconds(timeout_ms),
                             [&] { return !inbox_->items.empty(); })) {
      return std::nullopt;
    }
    Bytes b = std::move(inbox_->items.front());
    inbox_->items.pop_front();
    return b;
  }

 private:
  std::shared_ptr<SharedQueue> inbox_;
  std::shared_ptr<SharedQueue> outbox_;
};

}  // namespace

LoopbackPair make_loopback_pair() {
  auto q1 = std::make_shared<SharedQueue>();
  auto q2 = std::make_shared<SharedQueue>();
  return {std::make_unique<LoopbackEndpoint>(q1, q2), std::make_unique<LoopbackEndpoint>(q2, q1)};
}

UdpEndpoint::UdpEndpoint(std::uint16_t local_port) {
  fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
  if (fd_ < 0) throw std::runtime_error(std::string("socket: ") + std::strerror(errno));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(local_port);
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    const std::string err = std::strerror(errno);
    ::close(fd_);
    throw std::runtime_error("bind 127.0.0.1:" + std::to_string(local_port) + ": " + err);
  }
  socklen_t len = sizeof(addr);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

UdpEndpoint::~UdpEndpoint() {
  if (fd_ >= 0) ::close(fd_);
}

void UdpEndpoint::connect_peer(std::uint16_t peer_port) { peer_port_ = peer_port; }

void UdpEndpoint::send(std::span<const std::uint8_t> datagram) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(peer_port_);
  const auto n = ::sendto(fd_, datagram.data(), datagram.size(), 0,
                          reinterpret_cast<sockaddr*>(&addr), sizeof(addr));
  if (n < 0) throw std::runtime_error(std::string("sendto: ") + std::strerror(errno));
}

std::optional<Bytes> UdpEndpoint::receive(int timeout_ms) {
  pollfd pfd{fd_, POLLIN, 0};
  const int ready = ::poll(&pfd, 1, timeout_ms);
  if (ready <= 0) return std::nullopt;
  Bytes buf(65536);
  const auto n = ::recv(fd_, buf.data(), buf.size(), 0);
  if (n < 0) return std::nullopt;
  buf.resize(static_cast<std::size_t>(n));
  return buf;
}

// ---------------------------------------------------------------------------

WireLogWriter::WireLogWriter(const std::string& path) : out_(path, std::ios::binary) {
  if (!out_) throw std::runtime_error("cannot open wire log " + path);
  out_.write("MFWL", 4);
}

void WireLogWriter::append(Direction dir, std::span<const std::uint8_t> datagram) {
  Bytes rec;
  rec.push_back(static_cast<std::uint8_t>(dir));
  put_u16(rec, static_cast<std::uint16_t>(datagram.size()));
  rec.insert(rec.end(), datagram.begin(), datagram.end());
  out_.write(reinterpret_cast<const char*>(rec.data()), static_cast<std::streamsize>(rec.size()));
  out_.flush();
}

std::vector<LoggedFrame> read_wire_log(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open wire log " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "MFWL", 4) != 0) {
    throw std::runtime_error(path + " is not a wire log");
  }
  std::vector<LoggedFrame> out;
  std::uint8_t head[3];
  while (in.read(reinterpret_cast<char*>(head), 3)) {
    const std::size_t len = head[1] | (static_cast<std::size_t>(head[2]) << 8);
    LoggedFrame f;
    f.direction = static_cast<Direction>(head[0]);
    f.datagram.resize(len);
    if (!in.read(reinterpret_cast<char*>(f.datagram.data()), static_cast<std::streamsize>(len))) {
      throw std::runtime_error(path + ": truncated wire log record");
    }
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace mfe
