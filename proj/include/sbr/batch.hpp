#pragma once

// Independent closed-loop runs fanned out across threads. run_batch_serial is
// the reference the parallel path is tested against.

#include <cstdint>
#include <span>
#include <vector>

#include "sbr/simloop.hpp"

namespace sbr {

struct RunSummary {
  RunMetrics metrics;
  double itae = 0.0;               // sum of t |theta| dt over the trace
  double rms_after_settling = 0.0; // RMS theta from settling_time on; 0 if unsettled
  double max_abs_x = 0.0;
};

RunSummary summarize(std::span<const TelemetryFrame> trace, const RunMetrics& metrics,
                     double control_period);

RunSummary run_summary(const ScenarioConfig& scenario);

std::vector<RunSummary> run_batch_serial(std::span<const ScenarioConfig> scenarios);

/// OpenMP version of run_batch_serial; results are identical and in input
/// order. Every config is validated before any thread starts.
std::vector<RunSummary> run_batch(std::span<const ScenarioConfig> scenarios);

/// `count` copies of `base` with seeds first_seed, first_seed + 1, ...
std::vector<ScenarioConfig> seed_sweep(const ScenarioConfig& base, std::uint64_t first_seed,
                                       std::size_t count);

int batch_threads();

}  // namespace sbr
