#pragma once

// Shared fixtures and independent oracles for the unit suites and the
// acceptance runner.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "slad/benders.hpp"
#include "slad/forecast.hpp"
#include "slad/formulation.hpp"
#include "slad/lp.hpp"
#include "slad/model.hpp"

namespace slad::fixtures {

std::string fixture_path(const std::string& name);

ValidatedCase toy_case();
ScenarioSet toy_day();
ScenarioSet toy_scenarios();

struct Case3Options {
  std::uint64_t seed = 1;
  bool congested = false;     // tighten both monitored limits so flows bind
  bool perturb = false;       // randomize costs, ramps and requirements
  double ramp_scale = 1.0;    // multiplies thermal ramp rates
};

/// Three buses in a triangle, a slow coal unit, a gas unit, a wind farm and an
/// import, two monitored lines, all reserve products required.
ValidatedCase make_case3(const Case3Options& options = {});

/// S equiprobable (or randomly weighted) load and wind trajectories of length T.
ScenarioSet case3_scenarios(const ValidatedCase& vcase, std::size_t periods, std::size_t count, std::uint64_t seed,
                            bool random_weights = false);

/// One realized day: a single scenario drawn from the same process.
ScenarioSet case3_day(const ValidatedCase& vcase, std::size_t periods, std::uint64_t seed);

/// Historical days from the same process (imperfect analogs of any day).
HistoryStore case3_history(const ValidatedCase& vcase, std::size_t periods, std::size_t days, std::uint64_t seed);

/// Minimum of c'x over [lo, hi] and the rows by enumerating every basic
/// solution. Only for a handful of variables. Returns +inf when infeasible.
double vertex_enumeration_minimum(const LinearProgram& lp);

/// Feasible first-stage points: vertices of the master under random
/// objectives, and midpoints between consecutive vertices.
std::vector<std::vector<double>> random_first_stage_points(const ValidatedCase& vcase, const SystemState& state,
                                                           const Scenario& current, std::size_t count,
                                                           std::uint64_t seed);

/// Recourse value of scenario s at x1, computed without the subproblem
/// builder: a look-ahead over that scenario alone with period 0 fixed to x1,
/// minus the cost of period 0 alone.
double recourse_oracle(const ValidatedCase& vcase, const SystemState& state, const ScenarioSet& scenarios,
                       std::size_t s, const std::vector<double>& x1);

/// Objective of the extensive form, solved with every flow row present.
double extensive_objective(const ValidatedCase& vcase, const SystemState& state, const ScenarioSet& scenarios);

/// Full-day toy look-ahead by brute force over the first-period split.
double toy_perfect_dispatch_cost();

bool close_rel(double a, double b, double rel, double abs_floor = 1.0);

}  // namespace slad::fixtures
