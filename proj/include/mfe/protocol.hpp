#pragma once

// Leader/follower wire protocol.
//
// Frame layout (all integers little-endian):
//
//   offset  size  field
//   0       2     magic "MF" (0x4D 0x46)
//   2       1     version (0x01)
//   3       1     kind
//   4       4     sequence
//   8       8     timestamp_us
//   16      2     payload_len
//   18      n     payload
//   18+n    4     CRC-32/IEEE over bytes [0, 18+n)

#include <array>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <fstream>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "mfe/kinematics.hpp"
#include "mfe/mapping.hpp"

namespace mfe {

using Bytes = std::vector<std::uint8_t>;

inline constexpr std::uint8_t kMagic0 = 0x4D;
inline constexpr std::uint8_t kMagic1 = 0x46;
inline constexpr std::uint8_t kProtocolVersion = 0x01;
inline constexpr std::size_t kHeaderSize = 18;
inline constexpr std::size_t kCrcSize = 4;
inline constexpr std::size_t kMinFrameSize = kHeaderSize + kCrcSize;

enum class FrameKind : std::uint8_t {
  EncoderFrame = 0x01,
  SensorFrame = 0x02,
  HapticCommand = 0x03,
  Heartbeat = 0x04,
};

/// Fixed payload size for each kind (bytes).
std::size_t payload_size(FrameKind kind);
std::string_view to_string(FrameKind kind);

struct Frame {
  FrameKind kind = FrameKind::Heartbeat;
  std::uint32_t sequence = 0;
  std::uint64_t timestamp_us = 0;
  Bytes payload;

  bool operator==(const Frame&) const = default;
};

enum class DecodeError {
  Truncated,   // shorter than a header + CRC, or size disagrees with payload_len
  BadCrc,
  BadMagic,
  BadVersion,
  BadKind,     // unknown kind byte
  BadPayload,  // payload_len does not match the kind's fixed layout
};

std::string_view to_string(DecodeError error);

using DecodeResult = std::variant<Frame, DecodeError>;

std::uint32_t crc32_ieee(std::span<const std::uint8_t> data);

/// Serializes a frame.  Throws DomainError if the payload exceeds 65535 bytes.
Bytes encode(const Frame& frame);

/// Parses exactly one datagram.  Never throws.
DecodeResult decode(std::span<const std::uint8_t> bytes);

// Typed payloads ------------------------------------------------------------

/// 20 x float32 angles (rad).  A canonical state must be expanded first.
Bytes encode_encoder_payload(const JointState& state);
JointState decode_encoder_payload(std::span<const std::uint8_t> payload);

/// 5 x float32 forces (N) + 27 x float32 temperatures (degC).
Bytes encode_sensor_payload(const SensorFrame& frame);
SensorFrame decode_sensor_payload(std::span<const std::uint8_t> payload);

/// 5 x float32 currents (mA) + 5 x float32 duties + 1 x float32 setpoint.
Bytes encode_command_payload(const HapticCommand& cmd);
HapticCommand decode_command_payload(std::span<const std::uint8_t> payload);

Frame make_encoder_frame(const JointState& state, std::uint32_t sequence, std::uint64_t ts_us);
Frame make_sensor_frame(const SensorFrame& frame, std::uint32_t sequence, std::uint64_t ts_us);
Frame make_command_frame(const HapticCommand& cmd, std::uint64_t ts_us);
Frame make_heartbeat(std::uint32_t sequence, std::uint64_t ts_us);

// Link model ----------------------------------------------------------------

enum class Direction : std::uint8_t { LeaderToFollower = 0, FollowerToLeader = 1 };

struct Outage {
  double start = 0.0;  // s, inclusive
  double end = 0.0;    // s, exclusive
};

/// Lossy, jittery one-way link.  Decisions are a pure function of
/// (seed, direction, sequence, send time) so every run replays identically.
struct LinkModel {
  double latency_ms = 5.0;
  double jitter_ms = 2.0;
  double drop_probability = 0.0;  // [0, 1)
  std::uint64_t seed = 1;
  std::vector<Outage> outages;  // windows of total loss (by send time)

  void validate() const;

  /// Delivery time (us) of a frame sent at `send_us`, or nullopt if dropped.
  std::optional<std::uint64_t> deliver(Direction dir, std::uint32_t sequence,
                                       std::uint64_t send_us) const;

  static LinkModel ideal();
};

// Watchdog ------------------------------------------------------------------

enum class LinkState { Live, Lost };
std::string_view to_string(LinkState state);

inline constexpr double kDefaultWatchdogTimeoutMs = 200.0;

/// LOST once the age of the last accepted frame exceeds the timeout.
LinkState watchdog_step(double last_rx_age_ms, double timeout_ms = kDefaultWatchdogTimeoutMs);

// Receiver --------------------------------------------------------------------

/// Buffers raw datagrams, applies the link model, and releases the freshest
/// frame of each kind once it is due.  A frame is never visible at the
/// instant it was sent (timestamp < now).  Late frames never override newer ones.
class FrameInbox {
 public:
  FrameInbox(LinkModel link, Direction direction) : link_(std::move(link)), direction_(direction) {}

  /// Accepts a raw datagram.  Undecodable datagrams are counted and discarded.
  void push(std::span<const std::uint8_t> datagram);

  /// Frames due at `now_us`, newest sequence per kind, oldest kind first.
  std::vector<Frame> poll(std::uint64_t now_us);

  /// Delivery time of the last accepted frame, if any.
  std::optional<std::uint64_t> last_rx_us() const { return last_rx_us_; }

  std::size_t dropped() const { return dropped_; }
  std::size_t rejected() const { return rejected_; }
  std::size_t stale() const { return stale_; }

 private:
  struct Pending {
    Frame frame;
    std::uint64_t due_us = 0;
  };

  LinkModel link_;
  Direction direction_;
  std::vector<Pending> pending_;
  std::array<std::optional<std::uint32_t>, 5> newest_{};  // by kind byte
  std::optional<std::uint64_t> last_rx_us_;
  std::size_t dropped_ = 0;
  std::size_t rejected_ = 0;
  std::size_t stale_ = 0;
};

// Transports ----------------------------------------------------------------

class Transport {
 public:
  virtual ~Transport() = default;
  virtual void send(std::span<const std::uint8_t> datagram) = 0;
  /// Blocks up to timeout_ms; nullopt on timeout.
  virtual std::optional<Bytes> receive(int timeout_ms) = 0;
};

/// Pair of in-process queues; `a` sends to `b` and vice versa.
struct LoopbackPair {
  std::unique_ptr<Transport> a;
  std::unique_ptr<Transport> b;
};
LoopbackPair make_loopback_pair();

inline constexpr std::uint16_t kDefaultLeaderToFollowerPort = 47001;
inline constexpr std::uint16_t kDefaultFollowerToLeaderPort = 47002;

/// UDP datagram endpoint bound to 127.0.0.1:local_port (0 = ephemeral).
class UdpEndpoint : public Transport {
 public:
  explicit UdpEndpoint(std::uint16_t local_port = 0);
  ~UdpEndpoint() override;
  UdpEndpoint(const UdpEndpoint&) = delete;
  UdpEndpoint& operator=(const UdpEndpoint&) = delete;

  std::uint16_t local_port() const { return port_; }
  void connect_peer(std::uint16_t peer_port);

  void send(std::span<const std::uint8_t> datagram) override;
  std::optional<Bytes> receive(int timeout_ms) override;

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
  std::uint16_t peer_port_ = 0;
};

// Wire log ------------------------------------------------------------------

struct LoggedFrame {
  Direction direction = Direction::LeaderToFollower;
  Bytes datagram;
};

/// Append-only binary record of every datagram sent in a session.
/// Format: "MFWL" then records of [u8 direction][u16 LE length][bytes].
class WireLogWriter {
 public:
  explicit WireLogWriter(const std::string& path);
  void append(Direction dir, std::span<const std::uint8_t> datagram);

 private:
  std::ofstream out_;
};

std::vector<LoggedFrame> read_wire_log(const std::string& path);

}  // namespace mfe
