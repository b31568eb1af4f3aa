#pragma once

// Newline-delimited ASCII protocol shared by the TCP and WebSocket
// endpoints.
//
//   inbound:  F | B | L | R | S | X | G <kp> <ki> <kd> | A <alpha> | T <hz>
//   outbound: TM <t> <theta_true> <theta_est> <x> <v> <duty_l> <duty_r> <status>
//             ERR <code>

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "sbr/command.hpp"
#include "sbr/simloop.hpp"

namespace sbr {

inline constexpr std::size_t kDefaultMaxFrameBytes = 64;

enum class ProtocolError { UnknownCommand, MalformedArgument, FrameTooLong };

std::string_view to_string(ProtocolError e);

/// Either a command or the reason the line was rejected.
using ParseResult = std::variant<Command, ProtocolError>;

/// Parses one line. A single trailing '\n' (optionally preceded by '\r') is
/// accepted; trailing spaces and tabs are ignored. Never throws.
ParseResult parse_frame(std::string_view line,
                        std::size_t max_frame_bytes = kDefaultMaxFrameBytes);

/// "ERR <code>\n"
std::string format_error(ProtocolError e);

/// One TM line including the newline; floats at 6 significant digits.
std::string encode_telemetry(const TelemetryFrame& frame);

/// Inverse of encode_telemetry (yaw_rate and wheel speed are not on the
/// wire and come back as zero).
std::optional<TelemetryFrame> parse_telemetry(std::string_view line);

}  // namespace sbr
