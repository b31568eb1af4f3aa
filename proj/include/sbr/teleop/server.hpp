#pragma once

// Teleoperation server: one paced simulation shared by any number of
// clients over a newline TCP stream and, optionally, a WebSocket endpoint.

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "sbr/simloop.hpp"
#include "sbr/teleop/broadcast.hpp"
#include "sbr/teleop/link.hpp"

namespace sbr::teleop {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;  // 0 picks an ephemeral port
};

/// Accepts "host:port", ":port" or "port". Throws std::invalid_argument.
Endpoint parse_endpoint(std::string_view text);

struct ServeOptions {
  Endpoint listen{"127.0.0.1", 7777};
  std::optional<Endpoint> ws_listen;
  LinkConfig link;
  std::uint64_t seed = 1;
  std::optional<double> duration;     // sim seconds; unlimited when absent
  double default_telemetry_hz = 50.0;
  bool paced = true;                  // false runs ticks back to back
  std::size_t queue_capacity = 256;
};

struct ServeReport {
  RunMetrics metrics;
  std::uint64_t dropped_commands = 0;
  std::uint64_t ticks = 0;
  double sim_time = 0.0;
  std::vector<AppliedCommand> applied;
};

class Server {
 public:
  /// `log` receives connection and overflow messages; may be null.
  Server(ScenarioConfig scenario, ServeOptions options, std::ostream* log = nullptr);
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds every endpoint and starts accepting. Throws std::runtime_error
  /// when an endpoint cannot be bound.
  void start();

  /// Runs the simulation on the calling thread until request_stop() or the
  /// configured duration, then shuts down all sessions.
  ServeReport run();

  /// Safe to call from a signal handler.
  void request_stop() noexcept { stop_requested_.store(true); }

  std::uint16_t tcp_port() const { return tcp_port_; }
  std::uint16_t ws_port() const { return ws_port_; }

  /// Simulation time published to session threads.
  SimTime sim_now() const { return clock_.now(); }

 private:
  enum class Transport { Tcp, WebSocket };
  struct Listener {
    int fd = -1;
    Transport transport = Transport::Tcp;
  };

  void accept_loop(Listener listener);
  void session(int fd, Transport transport);
  void shutdown();
  void logf(const char* fmt, ...);

  ScenarioConfig scenario_;
  ServeOptions options_;
  std::ostream* log_;
  std::mutex log_mutex_;

  SimClock clock_;
  CommandQueue queue_;
  std::unique_ptr<CommandIngress> ingress_;
  TelemetryBroadcast broadcast_;

  std::vector<Listener> listeners_;
  std::uint16_t tcp_port_ = 0;
  std::uint16_t ws_port_ = 0;

  std::atomic<bool> stop_requested_{false};
  std::atomic<bool> stopping_{false};
  std::vector<std::thread> acceptors_;
  std::mutex sessions_mutex_;
  std::list<std::thread> sessions_;
  bool started_ = false;
};

}  // namespace sbr::teleop
