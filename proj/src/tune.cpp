#include "sbr/tune.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sbr {

namespace {

using GainVector = std::array<double, 6>;  // outer kp ki kd, inner kp ki kd

constexpr double kImprovement = 1e-6;

GainVector gains_of(const ControlConfig& c) {
  return {c.outer.kp, c.outer.ki, c.outer.kd, c.inner.kp, c.inner.ki, c.inner.kd};
}

ScenarioConfig with_gains(const ScenarioConfig& base, const GainVector& g) {
  ScenarioConfig s = base;
  s.control.outer = {g[0], g[1], g[2]};
  s.control.inner = {g[3], g[4], g[5]};
  return s;
}

std::vector<std::size_t> axes_for(TuneTarget t) {
  switch (t) {
    case TuneTarget::OuterLoop: return {0, 1, 2};
    case TuneTarget::InnerLoop: return {3, 4, 5};
    case TuneTarget::Both: return {0, 1, 2, 3, 4, 5};
  }
  return {};
}

const GainBounds& bounds_for(const TuneSpec& spec, std::size_t axis) {
  return axis < 3 ? spec.outer_bounds[axis] : spec.inner_bounds[axis - 3];
}

struct Evaluated {
  std::vector<double> scores;
  bool all_fell = true;
};

Evaluated evaluate(const ScenarioConfig& scenario, const std::vector<GainVector>& candidates,
                   const TuneSpec& spec) {
  std::vector<ScenarioConfig> configs;
  configs.reserve(candidates.size());
  for (const auto& g : candidates) configs.push_back(with_gains(scenario, g));
  const std::vector<RunSummary> runs = run_batch(configs);
  Evaluated e;
  for (const auto& r : runs) {
    e.scores.push_back(score(r, spec.objective, spec.fall_penalty, scenario.duration));
    e.all_fell = e.all_fell && r.metrics.fell;
  }
  return e;
}

// Index of the lowest score; exact ties go to the lexicographically smallest
// gain vector.
std::size_t argmin(const std::vector<double>& scores, const std::vector<GainVector>& cands) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] < scores[best] || (scores[i] == scores[best] && cands[i] < cands[best]))
      best = i;
  }
  return best;
}

TuneResult finish(const GainVector& g, double objective, bool all_fell,
                  std::vector<double> passes, std::size_t evaluations) {
  TuneResult r;
  r.outer = {g[0], g[1], g[2]};
  r.inner = {g[3], g[4], g[5]};
  r.objective = objective;
  r.all_fell = all_fell;
  r.pass_objectives = std::move(passes);
  r.evaluations = evaluations;
  return r;
}

TuneResult grid_search(const ScenarioConfig& scenario, const TuneSpec& spec) {
  const auto axes = axes_for(spec.target);
  std::vector<std::vector<double>> values;
  for (std::size_t a : axes) values.push_back(grid_axis(bounds_for(spec, a), spec.points));

  std::vector<GainVector> cands;
  const GainVector start = gains_of(scenario.control);
  std::vector<std::size_t> idx(axes.size(), 0);
  while (true) {
    GainVector g = start;
    for (std::size_t k = 0; k < axes.size(); ++k) g[axes[k]] = values[k][idx[k]];
    cands.push_back(g);
    std::size_t k = axes.size();
    while (k > 0 && ++idx[k - 1] == values[k - 1].size()) idx[--k] = 0;
    if (k == 0) break;
  }

  const Evaluated e = evaluate(scenario, cands, spec);
  const std::size_t best = argmin(e.scores, cands);
  return finish(cands[best], e.scores[best], e.all_fell, {}, cands.size());
}

TuneResult coordinate_descent(const ScenarioConfig& scenario, const TuneSpec& spec) {
  GainVector current = gains_of(scenario.control);
  Evaluated first = evaluate(scenario, {current}, spec);
  double current_score = first.scores[0];
  bool all_fell = first.all_fell;
  std::size_t evaluations = 1;
  std::vector<double> passes;

  for (int pass = 0; pass < spec.max_passes; ++pass) {
    bool improved = false;
    for (std::size_t axis : axes_for(spec.target)) {
      std::vector<GainVector> cands;
      for (double v : grid_axis(bounds_for(spec, axis), spec.points)) {
        GainVector g = current;
        g[axis] = v;
        cands.push_back(g);
      }
      const Evaluated e = evaluate(scenario, cands, spec);
      evaluations += cands.size();
      all_fell = all_fell && e.all_fell;
      const std::size_t best = argmin(e.scores, cands);
      if (e.scores[best] < current_score - kImprovement) {
        current = cands[best];
        current_score = e.scores[best];
        improved = true;
      }
    }
    passes.push_back(current_score);
    if (!improved) break;
  }
  return finish(current, current_score, all_fell, std::move(passes), evaluations);
}

}  // namespace

void TuneSpec::validate() const {
  auto check = [](const GainBounds& b) {
    if (!(std::isfinite(b.low) && std::isfinite(b.high) && b.low >= 0.0 && b.low < b.high))
      throw std::invalid_argument("tune: gain bounds need 0 <= low < high");
  };
  for (const auto& b : outer_bounds) check(b);
  for (const auto& b : inner_bounds) check(b);
  if (points < 1) throw std::invalid_argument("tune: grid points must be >= 1");
  if (!(fall_penalty > 0.0)) throw std::invalid_argument("tune: fall penalty must be > 0");
  if (!std::isfinite(initial_tilt)) throw std::invalid_argument("tune: initial tilt must be finite");
  if (max_passes < 1) throw std::invalid_argument("tune: max_passes must be >= 1");
}

double score(const RunSummary& run, Objective objective, double fall_penalty, double duration) {
  if (run.metrics.fell) return fall_penalty;
  if (objective == Objective::Itae) return run.itae;
  if (run.metrics.settled) return *run.metrics.settling_time;
  return duration + run.metrics.max_abs_theta;
}

ScenarioConfig tuning_scenario(const ScenarioConfig& base, const TuneSpec& spec) {
  ScenarioConfig s = base;
  s.imu = s.imu.noiseless();
  s.initial_state = {0.0, 0.0, spec.initial_tilt, 0.0};
  s.script.clear();
  return s;
}

std::vector<double> grid_axis(const GainBounds& b, int points) {
  if (points <= 1) return {b.low};
  std::vector<double> v(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i)
    v[static_cast<std::size_t>(i)] = b.low + (b.high - b.low) * i / (points - 1);
  return v;
}

TuneResult tune(const ScenarioConfig& base, const TuneSpec& spec) {
  spec.validate();
  const ScenarioConfig scenario = tuning_scenario(base, spec);
  scenario.validate();
  return spec.search == SearchMethod::Grid ? grid_search(scenario, spec)
                                           : coordinate_descent(scenario, spec);
}

TuneTarget parse_tune_target(std::string_view s) {
  if (s == "outer") return TuneTarget::OuterLoop;
  if (s == "inner") return TuneTarget::InnerLoop;
  if (s == "both") return TuneTarget::Both;
  throw std::invalid_argument("unknown tune target '" + std::string(s) + "'");
}

SearchMethod parse_search_method(std::string_view s) {
  if (s == "grid") return SearchMethod::Grid;
  if (s == "cd" || s == "coordinate-descent") return SearchMethod::CoordinateDescent;
  throw std::invalid_argument("unknown search method '" + std::string(s) + "'");
}

Objective parse_objective(std::string_view s) {
  if (s == "settling" || s == "settling-time") return Objective::SettlingTime;
  if (s == "itae") return Objective::Itae;
  throw std::invalid_argument("unknown objective '" + std::string(s) + "'");
}

}  // namespace sbr
