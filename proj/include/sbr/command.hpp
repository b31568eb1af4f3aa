#pragma once

#include <string>
#include <variant>

namespace sbr {

namespace cmd {
struct Forward { bool operator==(const Forward&) const = default; };
struct Backward { bool operator==(const Backward&) const = default; };
struct Left { bool operator==(const Left&) const = default; };
struct Right { bool operator==(const Right&) const = default; };
struct Stop { bool operator==(const Stop&) const = default; };
struct SetGains {
  double kp = 0.0;
  double ki = 0.0;
  double kd = 0.0;
  bool operator==(const SetGains&) const = default;
};
struct SetAlpha {
  double alpha = 0.0;
  bool operator==(const SetAlpha&) const = default;
};
struct TelemetryRate {
  double hz = 0.0;
  bool operator==(const TelemetryRate&) const = default;
};
struct Reset { bool operator==(const Reset&) const = default; };
}  // namespace cmd

/// A validated teleoperation instruction.
using Command = std::variant<cmd::Forward, cmd::Backward, cmd::Left, cmd::Right,
                             cmd::Stop, cmd::SetGains, cmd::SetAlpha,
                             cmd::TelemetryRate, cmd::Reset>;

bool is_steering(const Command& c);

/// Wire form without the trailing newline, e.g. "G 18 60 0.9".
std::string to_wire(const Command& c);

}  // namespace sbr
