#pragma once

// Automated gain search over noise-free recoveries from a fixed tilt.

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

#include "sbr/batch.hpp"
#include "sbr/control.hpp"
#include "sbr/simloop.hpp"

namespace sbr {

enum class TuneTarget { OuterLoop, InnerLoop, Both };
enum class SearchMethod { Grid, CoordinateDescent };
enum class Objective { SettlingTime, Itae };

struct GainBounds {
  double low = 0.0;
  double high = 1.0;
};

struct TuneSpec {
  TuneTarget target = TuneTarget::OuterLoop;
  SearchMethod search = SearchMethod::Grid;
  std::array<GainBounds, 3> outer_bounds{{{10.0, 100.0}, {300.0, 1200.0}, {0.0, 2.0}}};
  std::array<GainBounds, 3> inner_bounds{{{0.002, 0.03}, {0.0, 0.5}, {0.0, 0.001}}};
  int points = 5;  // grid points per axis
  Objective objective = Objective::SettlingTime;
  double fall_penalty = 1e6;
  double initial_tilt = 0.087;  // rad
  int max_passes = 50;          // coordinate descent safety stop

  void validate() const;
};

struct TuneResult {
  PidGains outer;
  PidGains inner;
  double objective = 0.0;
  bool all_fell = false;
  std::vector<double> pass_objectives;  // coordinate descent, one per pass
  std::size_t evaluations = 0;
};

/// Lower is better. Falls score fall_penalty; runs that stay up but never
/// settle score the run duration plus their peak tilt.
double score(const RunSummary& run, Objective objective, double fall_penalty,
             double duration);

/// The noise-free recovery scenario each candidate is scored on.
ScenarioConfig tuning_scenario(const ScenarioConfig& base, const TuneSpec& spec);

std::vector<double> grid_axis(const GainBounds& bounds, int points);

TuneResult tune(const ScenarioConfig& base, const TuneSpec& spec);

TuneTarget parse_tune_target(std::string_view s);
SearchMethod parse_search_method(std::string_view s);
Objective parse_objective(std::string_view s);

}  // namespace sbr
