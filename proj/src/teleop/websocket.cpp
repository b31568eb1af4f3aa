#include "sbr/teleop/websocket.hpp"

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <algorithm>
#include <cctype>

namespace sbr::teleop::ws {

namespace {

constexpr std::string_view kGuid = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

bool has_token(std::string_view list, std::string_view token) {
  const std::string l = lower(list);
  std::size_t pos = 0;
  while (pos <= l.size()) {
    std::size_t comma = l.find(',', pos);
    if (comma == std::string::npos) comma = l.size();
    if (trim(std::string_view(l).substr(pos, comma - pos)) == token) return true;
    pos = comma + 1;
  }
  return false;
}

bool is_control(Opcode op) { return static_cast<std::uint8_t>(op) >= 0x8; }

bool known(std::uint8_t op) {
  return op == 0x0 || op == 0x1 || op == 0x2 || op == 0x8 || op == 0x9 || op == 0xA;
}

}  // namespace

std::string accept_key(std::string_view client_key) {
  std::string material(client_key);
  material.append(kGuid);
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(material.data()), material.size(), digest);
  unsigned char encoded[4 * ((SHA_DIGEST_LENGTH + 2) / 3) + 1];
  const int n = EVP_EncodeBlock(encoded, digest, SHA_DIGEST_LENGTH);
  return std::string(reinterpret_cast<const char*>(encoded), static_cast<std::size_t>(n));
}

std::optional<HandshakeRequest> parse_handshake(std::string_view request) {
  const std::size_t line_end = request.find("\r\n");
  if (line_end == std::string_view::npos) return std::nullopt;
  const std::string_view request_line = request.substr(0, line_end);
  if (request_line.substr(0, 4) != "GET ") return std::nullopt;
  const std::size_t path_end = request_line.find(' ', 4);
  if (path_end == std::string_view::npos) return std::nullopt;

  HandshakeRequest req;
  req.path = std::string(request_line.substr(4, path_end - 4));
  bool upgrade = false;
  bool connection = false;
  bool version = false;

  std::size_t pos = line_end + 2;
  while (pos < request.size()) {
    std::size_t end = request.find("\r\n", pos);
    if (end == std::string_view::npos) end = request.size();
    const std::string_view line = request.substr(pos, end - pos);
    pos = end + 2;
    if (line.empty()) break;
    const std::size_t colon = line.find(':');
    if (colon == std::string_view::npos) continue;
    const std::string name = lower(trim(line.substr(0, colon)));
    const std::string_view value = trim(line.substr(colon + 1));
    if (name == "upgrade") {
      upgrade = lower(value) == "websocket";
    } else if (name == "connection") {
      connection = has_token(value, "upgrade");
    } else if (name == "sec-websocket-version") {
      version = value == "13";
    } else if (name == "sec-websocket-key") {
      req.key = std::string(value);
    }
  }
  if (!upgrade || !connection || !version || req.key.empty()) return std::nullopt;
  return req;
}

std::string handshake_response(const HandshakeRequest& req) {
  return "HTTP/1.1 101 Switching Protocols\r\n"
         "Upgrade: websocket\r\n"
         "Connection: Upgrade\r\n"
         "Sec-WebSocket-Accept: " +
         accept_key(req.key) + "\r\n\r\n";
}

std::string handshake_rejection() {
  return "HTTP/1.1 400 Bad Request\r\n"
         "Content-Length: 0\r\n"
         "Connection: close\r\n\r\n";
}

std::string encode_frame(Opcode op, std::string_view payload,
                         std::optional<std::array<std::uint8_t, 4>> mask) {
  std::string out;
  out.push_back(static_cast<char>(0x80 | static_cast<std::uint8_t>(op)));
  const std::uint8_t mask_bit = mask ? 0x80 : 0x00;
  const std::uint64_t n = payload.size();
  if (n < 126) {
    out.push_back(static_cast<char>(mask_bit | n));
  } else if (n <= 0xFFFF) {
    out.push_back(static_cast<char>(mask_bit | 126));
    out.push_back(static_cast<char>((n >> 8) & 0xFF));
    out.push_back(static_cast<char>(n & 0xFF));
  } else {
    out.push_back(static_cast<char>(mask_bit | 127));
    for (int shift = 56; shift >= 0; shift -= 8) {
      out.push_back(static_cast<char>((n >> shift) & 0xFF));
    }
  }
  if (mask) {
    for (std::uint8_t b : *mask) out.push_back(static_cast<char>(b));
    for (std::size_t i = 0; i < payload.size(); ++i) {
      out.push_back(static_cast<char>(static_cast<std::uint8_t>(payload[i]) ^ (*mask)[i % 4]));
    }
  } else {
    out.append(payload);
  }
  return out;
}

DecodeStatus FrameDecoder::fail(std::string_view why) {
  error_ = std::string(why);
  return DecodeStatus::Error;
}

DecodeStatus FrameDecoder::next(Message& out) {
  while (true) {
    if (!error_.empty()) return DecodeStatus::Error;
    if (buffer_.size() < 2) return DecodeStatus::NeedMore;

    const auto byte = [&](std::size_t i) { return static_cast<std::uint8_t>(buffer_[i]); };
    const bool fin = byte(0) & 0x80;
    if (byte(0) & 0x70) return fail("reserved bits set");
    const std::uint8_t raw_op = byte(0) & 0x0F;
    if (!known(raw_op)) return fail("unknown opcode");
    const Opcode op = static_cast<Opcode>(raw_op);
    const bool masked = byte(1) & 0x80;
    if (require_mask_ && !masked) return fail("unmasked client frame");

    std::uint64_t len = byte(1) & 0x7F;
    std::size_t header = 2;
    if (len == 126) {
      if (buffer_.size() < 4) return DecodeStatus::NeedMore;
      len = (std::uint64_t{byte(2)} << 8) | byte(3);
      header = 4;
    } else if (len == 127) {
      if (buffer_.size() < 10) return DecodeStatus::NeedMore;
      len = 0;
      for (std::size_t i = 0; i < 8; ++i) len = (len << 8) | byte(2 + i);
      header = 10;
    }
    if (is_control(op) && (!fin || len > 125)) return fail("bad control frame");
    if (len > max_ || partial_.size() + len > max_) return fail("message too large");
    if (masked) header += 4;
    if (buffer_.size() < header + len) return DecodeStatus::NeedMore;

    std::string payload = buffer_.substr(header, static_cast<std::size_t>(len));
    if (masked) {
      const std::size_t k = header - 4;
      for (std::size_t i = 0; i < payload.size(); ++i) {
        payload[i] = static_cast<char>(static_cast<std::uint8_t>(payload[i]) ^ byte(k + i % 4));
      }
    }
    buffer_.erase(0, header + static_cast<std::size_t>(len));

    if (is_control(op)) {
      out = {op, std::move(payload)};
      return DecodeStatus::Ready;
    }
    if (op == Opcode::Continuation) {
      if (!partial_op_) return fail("continuation without start");
      partial_ += payload;
    } else {
      if (partial_op_) return fail("new message inside fragmented message");
      partial_op_ = op;
      partial_ = std::move(payload);
    }
    if (fin) {
      out = {*partial_op_, std::move(partial_)};
      partial_op_.reset();
      partial_.clear();
      return DecodeStatus::Ready;
    }
  }
}

}  // namespace sbr::teleop::ws
