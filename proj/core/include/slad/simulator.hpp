#pragma once

// Rolling-horizon replay of one day: every period the chosen policy solves,
// its first period binds, and the binding dispatch is re-priced against the
// realized demand.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "slad/benders.hpp"
#include "slad/forecast.hpp"
#include "slad/formulation.hpp"
#include "slad/model.hpp"

namespace slad {

enum class PolicyKind : std::uint8_t { kSced, kLad, kSlad, kPlad, kPd };
std::string_view to_string(PolicyKind kind);
PolicyKind parse_policy(std::string_view name);  // "sced", "lad", ... (case-insensitive)

enum class ScenarioSource : std::uint8_t {
  kFile,  // a day-long scenario set supplied up front
  kKnn,   // nearest historical days given the observed prefix
  kMean,  // mean of the file scenarios
};
std::string_view to_string(ScenarioSource source);
ScenarioSource parse_source(std::string_view name);

struct PolicySpec {
  PolicyKind kind = PolicyKind::kSced;
  std::size_t horizon = 12;  // periods; forced to 1 for SCED and to the day for PD
  ScenarioSource source = ScenarioSource::kFile;
  BendersConfig benders;
  bool use_benders = true;     // false solves SLAD as one extensive-form LP
  std::size_t knn_k = 10;
  std::size_t knn_window = 0;  // 0 matches on the whole observed prefix
  std::size_t sample = 0;      // if nonzero, scenarios drawn per step using the seed

  /// Applies the SCED and PD horizon rules and checks the rest.
  PolicySpec normalized(std::size_t day_length) const;
};

/// Where look-ahead policies get their view of the future.
struct Forecaster {
  const ScenarioSet* day_scenarios = nullptr;  // source kFile / kMean
  const HistoryStore* history = nullptr;       // source kKnn
};

struct AvailableCapacity {
  std::vector<double> per_generator;
  double total = 0.0;
  double slow = 0.0;  // ramp rate below 1% of capacity per minute
  double fast = 0.0;
};

/// min(pmax_t, prev + ramp_up * step) for every committed generator; pmax_t
/// comes from `actual` period t when it overrides the generator.
AvailableCapacity available_capacity(const SystemState& state, const ValidatedCase& vcase, std::size_t t,
                                     const Scenario* actual = nullptr);

struct SimulationStep {
  std::size_t period = 0;
  std::vector<GeneratorPoint> binding;
  double demand = 0.0;
  PeriodSlacks slacks;
  std::vector<double> flow;
  CostBreakdown cost;
  AvailableCapacity capacity;
  double solve_objective = 0.0;
  double solve_ms = 0.0;
  std::size_t benders_iterations = 0;
  bool iteration_limit = false;  // Benders stopped before closing the gap
  std::size_t scenarios = 0;
};

struct SimulationLog {
  PolicySpec policy;
  std::vector<SimulationStep> steps;
  CostBreakdown totals;
};

class SimulationError : public std::runtime_error {
 public:
  SimulationError(std::size_t step, const std::string& what)
      : std::runtime_error("step " + std::to_string(step) + ": " + what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Replays `actuals` (one scenario, one day) under the policy. Equal seeds
/// give identical logs.
SimulationLog run_simulation(const ValidatedCase& vcase, const ScenarioSet& actuals, const PolicySpec& policy,
                             const Forecaster& forecaster, std::uint64_t seed);

/// One full-day look-ahead solve on the realized data, reported per period.
SimulationLog run_perfect_dispatch(const ValidatedCase& vcase, const ScenarioSet& actuals);

/// (cost_sced - cost_x) / cost_sced. Throws std::invalid_argument if
/// cost_sced <= 0.
double daily_savings(double cost_x, double cost_sced);

/// Scenario set seen at step t: periods [t, t + horizon) with period 0
/// replaced by the realized values. Exposed for tests.
ScenarioSet step_scenarios(const ValidatedCase& vcase, const ScenarioSet& actuals, const PolicySpec& policy,
                           const Forecaster& forecaster, std::size_t t, std::size_t horizon, std::uint64_t seed);

}  // namespace slad
