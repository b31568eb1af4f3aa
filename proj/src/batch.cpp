#include "sbr/batch.hpp"

#include <cmath>
#include <exception>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace sbr {

RunSummary summarize(std::span<const TelemetryFrame> trace, const RunMetrics& metrics,
                     double control_period) {
  RunSummary s;
  s.metrics = metrics;
  double sum_sq = 0.0;
  std::size_t n = 0;
  for (const auto& f : trace) {
    s.itae += f.t * std::abs(f.theta_true) * control_period;
    s.max_abs_x = std::max(s.max_abs_x, std::abs(f.x));
    if (metrics.settled && f.t >= *metrics.settling_time) {
      sum_sq += f.theta_true * f.theta_true;
      ++n;
    }
  }
  if (n) s.rms_after_settling = std::sqrt(sum_sq / static_cast<double>(n));
  return s;
}

RunSummary run_summary(const ScenarioConfig& scenario) {
  const RunResult r = run(scenario);
  return summarize(r.trace, r.metrics, scenario.control_period);
}

std::vector<RunSummary> run_batch_serial(std::span<const ScenarioConfig> scenarios) {
  std::vector<RunSummary> out;
  out.reserve(scenarios.size());
  for (const auto& s : scenarios) out.push_back(run_summary(s));
  return out;
}

std::vector<RunSummary> run_batch(std::span<const ScenarioConfig> scenarios) {
  for (const auto& s : scenarios) s.validate();

  std::vector<RunSummary> out(scenarios.size());
  std::exception_ptr failure;
  const auto n = static_cast<std::int64_t>(scenarios.size());

#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = run_summary(scenarios[static_cast<std::size_t>(i)]);
    } catch (...) {
#pragma omp critical(sbr_batch_failure)
      if (!failure) failure = std::current_exception();
    }
  }

  if (failure) std::rethrow_exception(failure);
  return out;
}

std::vector<ScenarioConfig> seed_sweep(const ScenarioConfig& base, std::uint64_t first_seed,
                                       std::size_t count) {
  std::vector<ScenarioConfig> out(count, base);
  for (std::size_t i = 0; i < count; ++i) out[i].seed = first_seed + i;
  return out;
}

int batch_threads() {
#if defined(_OPENMP)
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace sbr
