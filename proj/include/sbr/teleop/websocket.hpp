#pragma once

// Minimal RFC 6455 support for the browser endpoint: the upgrade handshake
// and single-message framing. Each text message carries one protocol line.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace sbr::teleop::ws {

enum class Opcode : std::uint8_t {
  Continuation = 0x0,
  Text = 0x1,
  Binary = 0x2,
  Close = 0x8,
  Ping = 0x9,
  Pong = 0xA,
};

/// Sec-WebSocket-Accept for a client's Sec-WebSocket-Key.
std::string accept_key(std::string_view client_key);

struct HandshakeRequest {
  std::string path;
  std::string key;
};

/// Parses an HTTP upgrade request (headers through the blank line). Returns
/// nullopt unless it is a GET with Upgrade: websocket, a Connection header
/// listing upgrade, version 13 and a key.
std::optional<HandshakeRequest> parse_handshake(std::string_view request);

std::string handshake_response(const HandshakeRequest& req);
std::string handshake_rejection();

/// One unfragmented frame. Servers send unmasked; pass a mask to produce
/// client frames.
std::string encode_frame(Opcode op, std::string_view payload,
                         std::optional<std::array<std::uint8_t, 4>> mask = std::nullopt);

struct Message {
  Opcode opcode = Opcode::Text;
  std::string payload;
};

enum class DecodeStatus { NeedMore, Ready, Error };

/// Incremental decoder for one direction of a connection. Reassembles
/// fragmented data messages; control frames are returned as they arrive.
class FrameDecoder {
 public:
  FrameDecoder(std::size_t max_message_bytes, bool require_mask)
      : max_(max_message_bytes), require_mask_(require_mask) {}

  void feed(std::string_view bytes) { buffer_.append(bytes); }

  /// Ready fills `out`; Error is sticky and means the peer broke framing
  /// rules or exceeded the size limit.
  DecodeStatus next(Message& out);

  std::string_view error() const { return error_; }

 private:
  DecodeStatus fail(std::string_view why);

  std::size_t max_;
  bool require_mask_;
  std::string buffer_;
  std::optional<Opcode> partial_op_;
  std::string partial_;
  std::string error_;
};

}  // namespace sbr::teleop::ws
