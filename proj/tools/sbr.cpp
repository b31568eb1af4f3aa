// sbr: batch runs, gain tuning and the teleoperation server.

#include <csignal>
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sbr/config.hpp"
#include "sbr/simloop.hpp"
#include "sbr/teleop/server.hpp"
#include "sbr/tune.hpp"

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::vector<std::pair<std::string, std::string>> metric_fields(const sbr::RunMetrics& m) {
  return {
      {"settled", m.settled ? "true" : "false"},
      {"settling_time", m.settling_time ? fmt(*m.settling_time) : "none"},
      {"max_abs_theta", fmt(m.max_abs_theta)},
      {"rms_theta", fmt(m.rms_theta)},
      {"fell", m.fell ? "true" : "false"},
      {"final_x", fmt(m.final_x)},
  };
}

sbr::GainBounds parse_bounds(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw CLI::ValidationError("bounds", "expected low:high");
  try {
    return {std::stod(text.substr(0, colon)), std::stod(text.substr(colon + 1))};
  } catch (const std::exception&) {
    throw CLI::ValidationError("bounds", "expected low:high, got '" + text + "'");
  }
}

std::atomic<sbr::teleop::Server*> g_server{nullptr};

extern "C" void on_signal(int) {
  if (auto* s = g_server.load()) s->request_stop();
}

int cmd_run(const std::string& config, const std::string& trace_path,
            const std::vector<std::string>& overrides) {
  const sbr::ScenarioConfig scenario = sbr::load_scenario(config, overrides);
  const sbr::RunResult result = sbr::run(scenario);
  if (!trace_path.empty()) sbr::write_trace(result.trace, trace_path);
  for (const auto& [k, v] : metric_fields(result.metrics)) std::cout << k << '=' << v << '\n';
  return 0;
}

struct TuneArgs {
  std::string target = "outer";
  std::string search = "grid";
  std::string objective = "settling";
  int points = 5;
  double penalty = 1e6;
  std::vector<std::string> outer;  // kp, ki, kd bounds as low:high
  std::vector<std::string> inner;
};

int cmd_tune(const std::string& config, const TuneArgs& a,
             const std::vector<std::string>& overrides) {
  const sbr::ScenarioConfig base = sbr::load_scenario(config, overrides);
  sbr::TuneSpec spec;
  spec.target = sbr::parse_tune_target(a.target);
  spec.search = sbr::parse_search_method(a.search);
  spec.objective = sbr::parse_objective(a.objective);
  spec.points = a.points;
  spec.fall_penalty = a.penalty;
  for (std::size_t i = 0; i < a.outer.size(); ++i) spec.outer_bounds[i] = parse_bounds(a.outer[i]);
  for (std::size_t i = 0; i < a.inner.size(); ++i) spec.inner_bounds[i] = parse_bounds(a.inner[i]);
  spec.validate();

  const sbr::TuneResult r = sbr::tune(base, spec);
  if (r.all_fell) std::cerr << "warning: every candidate fell; reporting the least bad\n";
  std::cout << "control.outer.kp=" << fmt(r.outer.kp) << '\n'
            << "control.outer.ki=" << fmt(r.outer.ki) << '\n'
            << "control.outer.kd=" << fmt(r.outer.kd) << '\n'
            << "control.inner.kp=" << fmt(r.inner.kp) << '\n'
            << "control.inner.ki=" << fmt(r.inner.ki) << '\n'
            << "control.inner.kd=" << fmt(r.inner.kd) << '\n'
            << "objective=" << fmt(r.objective) << '\n'
            << "all_fell=" << (r.all_fell ? "true" : "false") << '\n'
            << "evaluations=" << r.evaluations << '\n';
  for (std::size_t i = 0; i < r.pass_objectives.size(); ++i) {
    std::cout << "pass" << i + 1 << "=" << fmt(r.pass_objectives[i]) << '\n';
  }
  return 0;
}

struct ServeArgs {
  std::string listen = "127.0.0.1:7777";
  std::string ws_listen;
  double latency_ms = 50.0;
  double jitter_ms = 10.0;
  std::uint64_t seed = 1;
  std::optional<double> duration;
  double telemetry_hz = 50.0;
};

int cmd_serve(const std::string& config, const ServeArgs& a,
              const std::vector<std::string>& overrides) {
  const sbr::ScenarioConfig scenario = sbr::load_scenario(config, overrides);
  sbr::teleop::ServeOptions opts;
  opts.listen = sbr::teleop::parse_endpoint(a.listen);
  if (!a.ws_listen.empty()) opts.ws_listen = sbr::teleop::parse_endpoint(a.ws_listen);
  opts.link.latency_mean = a.latency_ms / 1000.0;
  opts.link.latency_jitter_std = a.jitter_ms / 1000.0;
  opts.seed = a.seed;
  opts.duration = a.duration;
  opts.default_telemetry_hz = a.telemetry_hz;

  sbr::teleop::Server server(scenario, opts, &std::cerr);
  try {
    server.start();
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  std::cout << "listening tcp=" << server.tcp_port();
  if (opts.ws_listen) std::cout << " ws=" << server.ws_port();
  std::cout << std::endl;

  g_server.store(&server);
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  const sbr::teleop::ServeReport report = server.run();
  g_server.store(nullptr);
  std::signal(SIGINT, SIG_DFL);
  std::signal(SIGTERM, SIG_DFL);

  std::cout << "final";
  for (const auto& [k, v] : metric_fields(report.metrics)) std::cout << ' ' << k << '=' << v;
  std::cout << " dropped_commands=" << report.dropped_commands
            << " sim_time=" << fmt(report.sim_time) << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-wheeled self-balancing robot simulator"};
  app.require_subcommand(1);

  std::string config;
  std::vector<std::string> overrides;

  auto* run = app.add_subcommand("run", "Run a scenario as fast as possible and print metrics");
  std::string trace_path;
  run->add_option("config", config, "Scenario file")->required();
  run->add_option("overrides", overrides, "key=value overrides applied after the file");
  run->add_option("-o,--trace", trace_path, "Write the CSV trace here");

  auto* tune = app.add_subcommand("tune", "Search PID gains on a noise-free recovery");
  TuneArgs targs;
  tune->add_option("config", config, "Scenario file")->required();
  tune->add_option("overrides", overrides, "key=value overrides applied after the file");
  tune->add_option("--target", targs.target, "outer, inner or both")->capture_default_str();
  tune->add_option("--search", targs.search, "grid or cd (coordinate descent)")
      ->capture_default_str();
  tune->add_option("--objective", targs.objective, "settling or itae")->capture_default_str();
  tune->add_option("--points", targs.points, "Grid points per gain")->capture_default_str();
  tune->add_option("--fall-penalty", targs.penalty, "Score of a run that falls")
      ->capture_default_str();
  tune->add_option("--outer-bounds", targs.outer, "Outer kp ki kd bounds, each low:high")
      ->expected(3);
  tune->add_option("--inner-bounds", targs.inner, "Inner kp ki kd bounds, each low:high")
      ->expected(3);

  auto* serve = app.add_subcommand("serve", "Run paced and accept teleoperation clients");
  ServeArgs sargs;
  serve->add_option("config", config, "Scenario file")->required();
  serve->add_option("overrides", overrides, "key=value overrides applied after the file");
  serve->add_option("--listen", sargs.listen, "TCP line endpoint host:port")
      ->capture_default_str();
  serve->add_option("--ws-listen", sargs.ws_listen, "WebSocket endpoint host:port");
  serve->add_option("--latency-ms", sargs.latency_ms, "Mean link latency")->capture_default_str();
  serve->add_option("--jitter-ms", sargs.jitter_ms, "Latency standard deviation")
      ->capture_default_str();
  serve->add_option("--seed", sargs.seed, "Link latency seed")->capture_default_str();
  serve->add_option("--duration", sargs.duration, "Stop after this many simulated seconds");
  serve->add_option("--telemetry-hz", sargs.telemetry_hz, "Initial per-client telemetry rate")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config, trace_path, overrides);
    if (*tune) return cmd_tune(config, targs, overrides);
    if (*serve) return cmd_serve(config, sargs, overrides);
  } catch (const sbr::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
