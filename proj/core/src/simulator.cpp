#include "slad/simulator.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <random>

namespace slad {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

std::vector<GeneratorPoint> first_period_points(const DispatchSolution& d) {
  std::vector<GeneratorPoint> out(d.num_generators);
  for (std::size_t g = 0; g < d.num_generators; ++g) out[g] = d.at(g, 0, 0);
  return out;
}

// Replaces period 0 of every scenario with the realized values of period t.
void pin_current(ScenarioSet& set, const ValidatedCase& vcase, const Scenario& actual, std::size_t t) {
  for (auto& sc : set.scenarios) {
    sc.load.at(0) = actual.load.at(t);
    for (const auto& [g, series] : actual.pmax_override) {
      auto& mine = sc.pmax_override[g];
      if (mine.size() != sc.load.size()) mine.assign(sc.load.size(), vcase->generators[g].pmax);
      mine[0] = series.at(t);
    }
    for (auto& [g, series] : sc.pmax_override)
      if (!actual.pmax_override.count(g)) series[0] = vcase->generators[g].pmax;
  }
}

// Draws `count` scenarios without replacement and renormalizes their weights.
ScenarioSet subsample(const ScenarioSet& set, std::size_t count, std::uint64_t seed) {
  if (count == 0 || count >= set.size()) return set;
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> idx(set.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (idx.size() - i));
    std::swap(idx[i], idx[j]);
  }
  std::sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(count));
  ScenarioSet out;
  out.horizon = set.horizon;
  double total = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    out.scenarios.push_back(set.scenarios[idx[i]]);
    total += out.scenarios.back().prob;
  }
  for (auto& sc : out.scenarios) sc.prob /= total;
  return out;
}

}  // namespace

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kSced: return "SCED";
    case PolicyKind::kLad: return "LAD";
    case PolicyKind::kSlad: return "SLAD";
    case PolicyKind::kPlad: return "PLAD";
    case PolicyKind::kPd: return "PD";
  }
  return "?";
}

PolicyKind parse_policy(std::string_view name) {
  const std::string n = lower(name);
  if (n == "sced") return PolicyKind::kSced;
  if (n == "lad") return PolicyKind::kLad;
  if (n == "slad") return PolicyKind::kSlad;
  if (n == "plad") return PolicyKind::kPlad;
  if (n == "pd") return PolicyKind::kPd;
  throw std::invalid_argument("unknown policy '" + std::string(name) + "'");
}

std::string_view to_string(ScenarioSource source) {
  switch (source) {
    case ScenarioSource::kFile: return "file";
    case ScenarioSource::kKnn: return "knn";
    case ScenarioSource::kMean: return "mean";
  }
  return "?";
}

ScenarioSource parse_source(std::string_view name) {
  const std::string n = lower(name);
  if (n == "file") return ScenarioSource::kFile;
  if (n == "knn") return ScenarioSource::kKnn;
  if (n == "mean") return ScenarioSource::kMean;
  throw std::invalid_argument("unknown scenario source '" + std::string(name) + "'");
}

PolicySpec PolicySpec::normalized(std::size_t day_length) const {
  PolicySpec p = *this;
  if (p.kind == PolicyKind::kSced) p.horizon = 1;
  if (p.kind == PolicyKind::kPd) p.horizon = day_length;
  if (p.horizon == 0) throw std::invalid_argument("policy horizon must be at least one period");
  if (p.kind == PolicyKind::kSlad) p.benders.validate();
  return p;
}

AvailableCapacity available_capacity(const SystemState& state, const ValidatedCase& vcase, std::size_t t,
                                     const Scenario* actual) {
  const SystemCase& c = vcase.data();
  AvailableCapacity out;
  out.per_generator.assign(vcase.num_generators(), 0.0);
  for (std::size_t g = 0; g < vcase.num_generators(); ++g) {
    const Generator& gen = c.generators[g];
    if (!gen.flags.commit.at(t)) continue;
    double pmax = gen.pmax;
    if (actual) {
      auto it = actual->pmax_override.find(g);
      if (it != actual->pmax_override.end()) pmax = it->second.at(t);
    }
    const double cap = std::min(pmax, state.prev_dispatch.at(g) + gen.ramp_up * c.step_minutes);
    out.per_generator[g] = cap;
    out.total += cap;
    (gen.ramp_up < 0.01 * gen.pmax ? out.slow : out.fast) += cap;
  }
  return out;
}

double daily_savings(double cost_x, double cost_sced) {
  if (!(cost_sced > 0.0)) throw std::invalid_argument("daily_savings: SCED cost must be positive");
  return (cost_sced - cost_x) / cost_sced;
}

ScenarioSet step_scenarios(const ValidatedCase& vcase, const ScenarioSet& actuals, const PolicySpec& policy,
                           const Forecaster& forecaster, std::size_t t, std::size_t horizon, std::uint64_t seed) {
  const Scenario& actual = actuals.scenarios.front();
  if (policy.kind == PolicyKind::kSced || policy.kind == PolicyKind::kPlad || policy.kind == PolicyKind::kPd)
    return actuals.slice(t, horizon);

  ScenarioSet set;
  if (policy.source == ScenarioSource::kKnn) {
    if (!forecaster.history) throw std::invalid_argument("KNN forecasts need a history");
    const ScenarioSet prefix = actuals.slice(0, t + 1);
    set = knn_scenarios(*forecaster.history, prefix.scenarios.front(), {policy.knn_k, policy.knn_window});
  } else {
    if (!forecaster.day_scenarios) throw std::invalid_argument("look-ahead policies need a scenario file");
    set = *forecaster.day_scenarios;
  }
  if (set.horizon < t + horizon)
    throw std::invalid_argument("scenario trajectories end before period " + std::to_string(t + horizon));
  set = subsample(set.slice(t, horizon), policy.sample, seed ^ (0x9E3779B97F4A7C15ULL * (t + 1)));
  if (policy.kind == PolicyKind::kLad || policy.source == ScenarioSource::kMean) set = mean_forecast(set);
  pin_current(set, vcase, actual, t);
  return set;
}

SimulationLog run_simulation(const ValidatedCase& vcase, const ScenarioSet& actuals, const PolicySpec& policy,
                             const Forecaster& forecaster, std::uint64_t seed) {
  if (actuals.size() != 1) throw std::invalid_argument("realized day must be a single scenario");
  validate_scenarios(actuals, vcase);
  const std::size_t day = actuals.horizon;
  const PolicySpec p = policy.normalized(day);
  if (p.kind == PolicyKind::kPd) {
    SimulationLog log = run_perfect_dispatch(vcase, actuals);
    log.policy = p;
    return log;
  }

  const Scenario& actual = actuals.scenarios.front();
  SimulationLog log;
  log.policy = p;
  SystemState state = SystemState::initial(vcase);
  for (std::size_t t = 0; t < day; ++t) {
    SimulationStep step;
    step.period = t;
    step.capacity = available_capacity(state, vcase, t, &actual);
    const std::size_t horizon = std::min(p.horizon, day - t);
    const auto start = Clock::now();
    try {
      const ScenarioSet view = step_scenarios(vcase, actuals, p, forecaster, t, horizon, seed);
      step.scenarios = view.size();
      DispatchSolution d;
      if (p.kind == PolicyKind::kSlad && horizon > 1 && p.use_benders) {
        BendersResult r = run_benders(vcase, state, view, p.benders);
        step.benders_iterations = r.state.iteration;
        step.iteration_limit = r.state.status == BendersStatus::kIterationLimit;
        d = std::move(r.first_stage);
      } else {
        DispatchModel m;
        if (horizon == 1) m = build_sced(vcase, state, view.scenarios.front());
        else if (p.kind == PolicyKind::kSlad) m = build_slad_extensive(vcase, state, view);
        else m = build_lad(vcase, state, view, horizon);
        const LpSolution sol = solve_lp(m.lp);
        d = extract_dispatch(sol, m.vmap);
      }
      step.solve_objective = d.objective;
      step.binding = first_period_points(d);
    } catch (const SolveError& ex) {
      throw SimulationError(t, ex.what());
    }
    step.solve_ms = elapsed_ms(start);

    const RepricedPeriod rp = reprice_period(vcase, step.binding, actual.load.at(t), t);
    step.demand = actual.total_load(t);
    step.slacks = rp.slacks;
    step.flow = rp.flow;
    step.cost = rp.cost;
    log.totals += rp.cost;
    for (std::size_t g = 0; g < vcase.num_generators(); ++g) state.prev_dispatch[g] = step.binding[g].pg;
    state.wall_clock = t + 1;
    log.steps.push_back(std::move(step));
  }
  log.totals.finalize();
  return log;
}

SimulationLog run_perfect_dispatch(const ValidatedCase& vcase, const ScenarioSet& actuals) {
  if (actuals.size() != 1) throw std::invalid_argument("realized day must be a single scenario");
  validate_scenarios(actuals, vcase);
  const std::size_t day = actuals.horizon;
  const Scenario& actual = actuals.scenarios.front();
  SimulationLog log;
  log.policy.kind = PolicyKind::kPd;
  log.policy.horizon = day;
  if (day == 0) return log;

  SystemState state = SystemState::initial(vcase);
  const auto start = Clock::now();
  DispatchModel m = build_lad(vcase, state, actuals, day);
  const LpSolution sol = solve_lp(m.lp);
  DispatchSolution d;
  try {
    d = extract_dispatch(sol, m.vmap);
  } catch (const SolveError& ex) {
    throw SimulationError(0, ex.what());
  }
  const double ms = elapsed_ms(start);

  for (std::size_t t = 0; t < day; ++t) {
    SimulationStep step;
    step.period = t;
    step.capacity = available_capacity(state, vcase, t, &actual);
    step.scenarios = 1;
    if (t == 0) {
      step.solve_ms = ms;
      step.solve_objective = d.objective;
    }
    step.binding.resize(vcase.num_generators());
    for (std::size_t g = 0; g < vcase.num_generators(); ++g) step.binding[g] = d.at(g, t, 0);
    const RepricedPeriod rp = reprice_period(vcase, step.binding, actual.load.at(t), t);
    step.demand = actual.total_load(t);
    step.slacks = rp.slacks;
    step.flow = rp.flow;
    step.cost = rp.cost;
    log.totals += rp.cost;
    for (std::size_t g = 0; g < vcase.num_generators(); ++g) state.prev_dispatch[g] = step.binding[g].pg;
    state.wall_clock = t + 1;
    log.steps.push_back(std::move(step));
  }
  log.totals.finalize();
  return log;
}

}  // namespace slad
