#include "sbr/teleop/server.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <deque>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "sbr/protocol.hpp"
#include "sbr/teleop/websocket.hpp"

namespace sbr::teleop {

namespace {

constexpr std::size_t kMaxHandshakeBytes = 8192;
constexpr std::size_t kMaxWsMessageBytes = 4096;
constexpr int kPollMs = 5;

void close_fd(int& fd) {
  if (fd >= 0) {
    ::close(fd);
    fd = -1;
  }
}

std::pair<int, std::uint16_t> bind_listener(const Endpoint& ep) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE | AI_NUMERICSERV;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(ep.port);
  const int rc = ::getaddrinfo(ep.host.empty() ? nullptr : ep.host.c_str(), port.c_str(),
                               &hints, &res);
  if (rc != 0) {
    throw std::runtime_error("cannot resolve " + ep.host + ": " + ::gai_strerror(rc));
  }
  std::string last_error = "no usable address";
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) {
      last_error = std::strerror(errno);
      continue;
    }
    const int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd, ai->ai_addr, ai->ai_addrlen) != 0 || ::listen(fd, 16) != 0) {
      last_error = std::strerror(errno);
      close_fd(fd);
      continue;
    }
    sockaddr_storage bound{};
    socklen_t len = sizeof bound;
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&bound), &len);
    std::uint16_t actual = 0;
    if (bound.ss_family == AF_INET) {
      actual = ntohs(reinterpret_cast<sockaddr_in*>(&bound)->sin_port);
    } else if (bound.ss_family == AF_INET6) {
      actual = ntohs(reinterpret_cast<sockaddr_in6*>(&bound)->sin6_port);
    }
    ::freeaddrinfo(res);
    return {fd, actual};
  }
  ::freeaddrinfo(res);
  throw std::runtime_error("cannot listen on " + ep.host + ":" + port + ": " + last_error);
}

bool send_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

std::string peer_name(int fd) {
  sockaddr_storage addr{};
  socklen_t len = sizeof addr;
  if (::getpeername(fd, reinterpret_cast<sockaddr*>(&addr), &len) != 0) return "?";
  char host[NI_MAXHOST];
  char serv[NI_MAXSERV];
  if (::getnameinfo(reinterpret_cast<sockaddr*>(&addr), len, host, sizeof host, serv,
                    sizeof serv, NI_NUMERICHOST | NI_NUMERICSERV) != 0) {
    return "?";
  }
  return std::string(host) + ":" + serv;
}

// Splits a byte stream into newline-terminated lines. Overlong lines are
// reported once and then skipped up to their newline.
class LineAssembler {
 public:
  explicit LineAssembler(std::size_t max) : max_(max) {}

  template <typename OnLine, typename OnOverflow>
  void feed(std::string_view bytes, OnLine&& on_line, OnOverflow&& on_overflow) {
    for (char c : bytes) {
      if (discarding_) {
        if (c == '\n') discarding_ = false;
        continue;
      }
      buf_.push_back(c);
      if (c == '\n') {
        on_line(std::string_view(buf_));
        buf_.clear();
      } else if (buf_.size() >= max_) {
        buf_.clear();
        discarding_ = true;
        on_overflow();
      }
    }
  }

 private:
  std::size_t max_;
  std::string buf_;
  bool discarding_ = false;
};

}  // namespace

Endpoint parse_endpoint(std::string_view text) {
  Endpoint ep;
  std::string_view port = text;
  const std::size_t colon = text.rfind(':');
  if (colon != std::string_view::npos) {
    std::string_view host = text.substr(0, colon);
    if (host.size() >= 2 && host.front() == '[' && host.back() == ']') {
      host = host.substr(1, host.size() - 2);
    }
    if (!host.empty()) ep.host = std::string(host);
    port = text.substr(colon + 1);
  }
  unsigned value = 0;
  const auto [end, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
  if (port.empty() || ec != std::errc{} || end != port.data() + port.size() || value > 65535) {
    throw std::invalid_argument("bad endpoint '" + std::string(text) + "'");
  }
  ep.port = static_cast<std::uint16_t>(value);
  return ep;
}

Server::Server(ScenarioConfig scenario, ServeOptions options, std::ostream* log)
    : scenario_(std::move(scenario)),
      options_(std::move(options)),
      log_(log),
      queue_(options_.queue_capacity) {
  scenario_.validate();
  options_.link.validate();
  if (!(options_.default_telemetry_hz >= 1.0 && options_.default_telemetry_hz <= 100.0)) {
    throw std::invalid_argument("default telemetry rate must be in [1, 100] Hz");
  }
  if (options_.duration && !(*options_.duration > 0.0)) {
    throw std::invalid_argument("duration must be > 0");
  }
  ingress_ = std::make_unique<CommandIngress>(options_.link, options_.seed, clock_, queue_);
}

Server::~Server() {
  request_stop();
  shutdown();
}

void Server::logf(const char* fmt, ...) {
  if (log_ == nullptr) return;
  char buf[256];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  std::lock_guard lock(log_mutex_);
  *log_ << buf << '\n';
  log_->flush();
}

void Server::start() {
  if (started_) return;
  try {
    auto [fd, port] = bind_listener(options_.listen);
    listeners_.push_back({fd, Transport::Tcp});
    tcp_port_ = port;
    if (options_.ws_listen) {
      auto [wfd, wport] = bind_listener(*options_.ws_listen);
      listeners_.push_back({wfd, Transport::WebSocket});
      ws_port_ = wport;
    }
  } catch (...) {
    for (auto& l : listeners_) close_fd(l.fd);
    listeners_.clear();
    throw;
  }
  started_ = true;
  for (const Listener& l : listeners_) {
    acceptors_.emplace_back([this, l] { accept_loop(l); });
  }
  logf("listening on tcp port %u", static_cast<unsigned>(tcp_port_));
  if (options_.ws_listen) logf("listening on websocket port %u", static_cast<unsigned>(ws_port_));
}

void Server::accept_loop(Listener listener) {
  while (!stopping_.load()) {
    pollfd p{listener.fd, POLLIN, 0};
    if (::poll(&p, 1, 50) <= 0) continue;
    const int fd = ::accept(listener.fd, nullptr, nullptr);
    if (fd < 0) continue;
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    timeval send_timeout{1, 0};
    ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &send_timeout, sizeof send_timeout);
    std::lock_guard lock(sessions_mutex_);
    if (stopping_.load()) {
      ::close(fd);
      break;
    }
    sessions_.emplace_back([this, fd, t = listener.transport] { session(fd, t); });
  }
}

void Server::session(int fd, Transport transport) {
  const std::uint32_t client = ingress_->new_client_id();
  const std::string peer = peer_name(fd);
  const bool websocket = transport == Transport::WebSocket;
  logf("client %u connected from %s (%s)", client, peer.c_str(), websocket ? "websocket" : "tcp");

  auto finish = [&](const char* why) {
    logf("client %u disconnected (%s)", client, why);
    ::close(fd);
  };

  char buf[4096];
  if (websocket) {
    std::string request;
    while (request.find("\r\n\r\n") == std::string::npos) {
      if (stopping_.load() || request.size() > kMaxHandshakeBytes) return finish("handshake");
      pollfd p{fd, POLLIN, 0};
      if (::poll(&p, 1, 50) <= 0) continue;
      const ssize_t n = ::recv(fd, buf, sizeof buf, 0);
      if (n <= 0) return finish("handshake");
      request.append(buf, static_cast<std::size_t>(n));
    }
    const auto req = ws::parse_handshake(request);
    if (!req) {
      send_all(fd, ws::handshake_rejection());
      return finish("bad handshake");
    }
    if (!send_all(fd, ws::handshake_response(*req))) return finish("handshake");
  }

  auto sub = broadcast_.subscribe();
  LatencyModel telemetry_delay(options_.link, options_.seed ^ (0x9E3779B97F4A7C15ull * client));
  double period = 1.0 / options_.default_telemetry_hz;
  double next_due = -std::numeric_limits<double>::infinity();
  std::deque<std::pair<SimTime, TelemetryFrame>> pending;
  SimTime last_release{0};

  auto send_line = [&](std::string_view line) {
    return websocket ? send_all(fd, ws::encode_frame(ws::Opcode::Text, line))
                     : send_all(fd, line);
  };

  bool alive = true;
  auto handle_line = [&](std::string_view line) {
    const ParseResult r = parse_frame(line, options_.link.max_frame_bytes);
    if (const auto* err = std::get_if<ProtocolError>(&r)) {
      alive = alive && send_line(format_error(*err));
      return;
    }
    const Command& c = std::get<Command>(r);
    if (const auto* rate = std::get_if<cmd::TelemetryRate>(&c)) {
      period = 1.0 / rate->hz;
      next_due = -std::numeric_limits<double>::infinity();
      return;
    }
    ingress_->submit(client, c);
  };

  LineAssembler lines(options_.link.max_frame_bytes);
  ws::FrameDecoder decoder(kMaxWsMessageBytes, true);
  const char* reason = "server stopping";

  while (alive && !stopping_.load()) {
    pollfd p{fd, POLLIN, 0};
    const int ready = ::poll(&p, 1, kPollMs);
    if (ready > 0) {
      const ssize_t n = ::recv(fd, buf, sizeof buf, 0);
      if (n <= 0) {
        reason = "peer closed";
        break;
      }
      const std::string_view bytes(buf, static_cast<std::size_t>(n));
      if (!websocket) {
        lines.feed(bytes, handle_line,
                   [&] { alive = alive && send_line(format_error(ProtocolError::FrameTooLong)); });
      } else {
        decoder.feed(bytes);
        ws::Message msg;
        ws::DecodeStatus st;
        while (alive && (st = decoder.next(msg)) == ws::DecodeStatus::Ready) {
          if (msg.opcode == ws::Opcode::Close) {
            send_all(fd, ws::encode_frame(ws::Opcode::Close, msg.payload.substr(0, 2)));
            alive = false;
            reason = "websocket close";
          } else if (msg.opcode == ws::Opcode::Ping) {
            alive = send_all(fd, ws::encode_frame(ws::Opcode::Pong, msg.payload));
          } else if (msg.opcode == ws::Opcode::Text) {
            std::string_view rest(msg.payload);
            do {
              const std::size_t nl = rest.find('\n');
              const std::size_t take = nl == std::string_view::npos ? rest.size() : nl + 1;
              handle_line(rest.substr(0, take));
              rest.remove_prefix(take);
            } while (!rest.empty() && alive);
          }
        }
        if (st == ws::DecodeStatus::Error) {
          send_all(fd, ws::encode_frame(ws::Opcode::Close, std::string("\x03\xea", 2)));
          alive = false;
          reason = "websocket protocol error";
        }
      }
    } else if (ready < 0 && errno != EINTR) {
      reason = "poll error";
      break;
    }

    while (auto f = sub->try_pop()) {
      if (f->t < next_due - 1e-9) continue;
      next_due = f->t < next_due + period ? next_due + period : f->t + period;
      // Released no earlier than the link delay after the frame's sim time,
      // and never out of order.
      last_release = std::max(last_release, from_seconds(f->t) + telemetry_delay.draw_delay());
      pending.emplace_back(last_release, *f);
    }
    const SimTime now = clock_.now();
    while (alive && !pending.empty() && pending.front().first <= now) {
      alive = send_line(encode_telemetry(pending.front().second));
      pending.pop_front();
    }
    if (!alive && std::strcmp(reason, "server stopping") == 0) reason = "send failed";
  }
  sub->close();
  finish(reason);
}

ServeReport Server::run() {
  start();
  Simulation sim(scenario_);
  MetricsAccumulator metrics(scenario_.settle_band, scenario_.settle_hold);
  ServeReport report;
  std::uint64_t dropped_seen = 0;
  const SimTime limit = options_.duration ? from_seconds(*options_.duration) : SimTime::max();
  const auto wall_start = std::chrono::steady_clock::now();

  clock_.publish(sim.now());
  while (!stop_requested_.load() && sim.now() < limit) {
    const TelemetryFrame frame = sim.tick(&queue_);
    metrics.add(frame);
    broadcast_.publish(frame);
    clock_.publish(sim.now());
    ++report.ticks;

    const std::uint64_t dropped = queue_.dropped();
    if (dropped != dropped_seen) {
      logf("command queue overflow: %llu commands dropped so far",
           static_cast<unsigned long long>(dropped));
      dropped_seen = dropped;
    }
    if (options_.paced) {
      std::this_thread::sleep_until(wall_start + std::chrono::duration_cast<
                                                     std::chrono::steady_clock::duration>(
                                                     sim.now()));
    }
  }

  report.metrics = metrics.finish();
  report.dropped_commands = queue_.dropped();
  report.sim_time = to_seconds(sim.now());
  report.applied = sim.applied_commands();
  shutdown();
  return report;
}

void Server::shutdown() {
  stopping_.store(true);
  broadcast_.close();
  for (auto& t : acceptors_) {
    if (t.joinable()) t.join();
  }
  acceptors_.clear();
  {
    std::lock_guard lock(sessions_mutex_);
    for (auto& t : sessions_) {
      if (t.joinable()) t.join();
    }
    sessions_.clear();
  }
  for (auto& l : listeners_) close_fd(l.fd);
  listeners_.clear();
}

}  // namespace sbr::teleop
