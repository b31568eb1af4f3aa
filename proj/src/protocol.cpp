#include "sbr/protocol.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <vector>

namespace sbr {

namespace {

std::vector<std::string_view> split(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t j = s.find(' ', i);
    if (j == std::string_view::npos) j = s.size();
    out.push_back(s.substr(i, j - i));
    i = j + 1;
  }
  return out;
}

std::optional<double> number(std::string_view tok) {
  if (tok.empty()) return std::nullopt;
  // from_chars would also take "inf"/"nan"; only plain decimals are allowed.
  for (char c : tok) {
    const bool ok = (c >= '0' && c <= '9') || c == '.' || c == '-' || c == '+' || c == 'e' ||
                    c == 'E';
    if (!ok) return std::nullopt;
  }
  const char* first = tok.data();
  if (*first == '+') {
    ++first;
    if (first == tok.data() + tok.size() || *first == '-') return std::nullopt;
  }
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(first, tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v))
    return std::nullopt;
  return v;
}

std::string trim_trailing(std::string_view line) {
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) line.remove_suffix(1);
  return std::string(line);
}

void put(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v + 0.0);
  out += buf;
}

}  // namespace

std::string_view to_string(ProtocolError e) {
  switch (e) {
    case ProtocolError::UnknownCommand: return "UnknownCommand";
    case ProtocolError::MalformedArgument: return "MalformedArgument";
    case ProtocolError::FrameTooLong: return "FrameTooLong";
  }
  return "UnknownCommand";
}

ParseResult parse_frame(std::string_view line, std::size_t max_frame_bytes) {
  if (line.size() > max_frame_bytes) return ProtocolError::FrameTooLong;
  const std::string body = trim_trailing(line);
  const std::vector<std::string_view> tok = split(body);
  if (tok.empty() || tok[0].size() != 1) return ProtocolError::UnknownCommand;

  const std::size_t args = tok.size() - 1;
  auto bare = [&](Command c) -> ParseResult {
    if (args != 0) return ProtocolError::MalformedArgument;
    return c;
  };
  auto numbers = [&](std::size_t n) -> std::optional<std::vector<double>> {
    if (args != n) return std::nullopt;
    std::vector<double> v;
    for (std::size_t i = 1; i <= n; ++i) {
      auto x = number(tok[i]);
      if (!x) return std::nullopt;
      v.push_back(*x);
    }
    return v;
  };

  switch (tok[0][0]) {
    case 'F': return bare(cmd::Forward{});
    case 'B': return bare(cmd::Backward{});
    case 'L': return bare(cmd::Left{});
    case 'R': return bare(cmd::Right{});
    case 'S': return bare(cmd::Stop{});
    case 'X': return bare(cmd::Reset{});
    case 'G': {
      auto v = numbers(3);
      if (!v || (*v)[0] < 0.0 || (*v)[1] < 0.0 || (*v)[2] < 0.0)
        return ProtocolError::MalformedArgument;
      return cmd::SetGains{(*v)[0], (*v)[1], (*v)[2]};
    }
    case 'A': {
      auto v = numbers(1);
      if (!v || (*v)[0] < 0.0 || (*v)[0] > 1.0) return ProtocolError::MalformedArgument;
      return cmd::SetAlpha{(*v)[0]};
    }
    case 'T': {
      auto v = numbers(1);
      if (!v || (*v)[0] < 1.0 || (*v)[0] > 100.0) return ProtocolError::MalformedArgument;
      return cmd::TelemetryRate{(*v)[0]};
    }
    default: return ProtocolError::UnknownCommand;
  }
}

std::string format_error(ProtocolError e) {
  return "ERR " + std::string(to_string(e)) + "\n";
}

std::string encode_telemetry(const TelemetryFrame& f) {
  std::string out = "TM";
  for (double v : {f.t, f.theta_true, f.theta_est, f.x, f.v, f.duty_left, f.duty_right}) {
    out += ' ';
    put(out, v);
  }
  out += ' ';
  out += to_string(f.status);
  out += '\n';
  return out;
}

std::optional<TelemetryFrame> parse_telemetry(std::string_view line) {
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  const auto tok = split(line);
  if (tok.size() != 9 || tok[0] != "TM") return std::nullopt;
  double v[7];
  for (int i = 0; i < 7; ++i) {
    auto x = number(tok[i + 1]);
    if (!x) return std::nullopt;
    v[i] = *x;
  }
  Status status;
  if (tok[8] == "Balancing") status = Status::Balancing;
  else if (tok[8] == "Fallen") status = Status::Fallen;
  else return std::nullopt;
  TelemetryFrame f;
  f.t = v[0];
  f.theta_true = v[1];
  f.theta_est = v[2];
  f.x = v[3];
  f.v = v[4];
  f.duty_left = v[5];
  f.duty_right = v[6];
  f.status = status;
  return f;
}

}  // namespace sbr
