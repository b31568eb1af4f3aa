#include "sbr/command.hpp"

#include <cstdio>

namespace sbr {

namespace {

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v + 0.0);
  return buf;
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

bool is_steering(const Command& c) {
  return std::holds_alternative<cmd::Forward>(c) || std::holds_alternative<cmd::Backward>(c) ||
         std::holds_alternative<cmd::Left>(c) || std::holds_alternative<cmd::Right>(c) ||
         std::holds_alternative<cmd::Stop>(c);
}

std::string to_wire(const Command& c) {
  return std::visit(
      Overloaded{
          [](const cmd::Forward&) -> std::string { return "F"; },
          [](const cmd::Backward&) -> std::string { return "B"; },
          [](const cmd::Left&) -> std::string { return "L"; },
          [](const cmd::Right&) -> std::string { return "R"; },
          [](const cmd::Stop&) -> std::string { return "S"; },
          [](const cmd::SetGains& g) {
            return "G " + number(g.kp) + " " + number(g.ki) + " " + number(g.kd);
          },
          [](const cmd::SetAlpha& a) { return "A " + number(a.alpha); },
          [](const cmd::TelemetryRate& r) { return "T " + number(r.hz); },
          [](const cmd::Reset&) -> std::string { return "X"; },
      },
      c);
}

}  // namespace sbr
