#pragma once

// Builds SCED, LAD, SLAD (extensive form), Benders master and Benders
// subproblem linear programs, and maps their solutions back to dispatch
// values and itemized costs.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "slad/lp.hpp"
#include "slad/model.hpp"

namespace slad {

enum class VarKind : std::uint8_t {
  kPg,
  kPgSegment,
  kReg,
  kSpin,
  kSuppOn,
  kSuppOff,
  kSurplus,
  kShortage,
  kRegShortage,
  kRspinShortage,
  kOpShortage,
  kFlowViolation,
  kTheta,
};

enum class RowFamily : std::uint8_t {
  kSegmentClearing,     // pg^k <= CF * width
  kDispatchTarget,      // pg = sum_k pg^k + CF * pmin
  kRegCapacity,         // 2 r_reg <= RF * RA * (pmax - pmin)
  kSpinCapacity,        // r_spin <= CF * RA * (pmax - pmin)
  kSuppOnCapacity,      // r_s_on <= CF * RA * (pmax - pmin)
  kSuppOffCapacity,     // r_s_off <= (1 - CF) * RA * cap
  kMinLimit,            // pg - r_reg >= CF * pmin
  kMaxLimit,            // pg + r_reg + r_spin + r_s_on <= CF * pmax
  kRampUp,
  kRampDown,
  kRegRamp,             // r_reg <= 5 * ramp_up
  kContingencyRamp,     // r_spin + r_s_on <= 10 * ramp_up
  kPowerBalance,
  kRegRequirement,
  kRspinRequirement,
  kOpRequirement,
  kFlowUpper,
  kFlowLower,
  kNonAnticipativity,
  kConsensus,
  kBendersCut,
};

/// Number of first-stage decisions per generator: pg, reg, spin, supp_on, supp_off.
inline constexpr std::size_t kFirstStagePerGenerator = 5;

struct ColumnKey {
  VarKind kind;
  int entity = -1;  // generator, branch or scenario (theta)
  int period = -1;
  int scenario = -1;
  int segment = 0;
  auto tie() const { return std::tie(kind, entity, period, scenario, segment); }
  friend bool operator<(const ColumnKey& a, const ColumnKey& b) { return a.tie() < b.tie(); }
};

struct RowKey {
  RowFamily family;
  int entity = -1;
  int period = -1;
  int scenario = -1;
  int sub = 0;  // segment, first-stage product or cut ordinal
  auto tie() const { return std::tie(family, entity, period, scenario, sub); }
  friend bool operator<(const RowKey& a, const RowKey& b) { return a.tie() < b.tie(); }
};

/// Ledger between model symbols and LP columns / rows, plus the data needed
/// to turn a solution back into dispatch values.
class VariableMap {
 public:
  int add_column(const ColumnKey& key, int column);
  int add_row(const RowKey& key, int row);

  std::optional<int> column(VarKind kind, int entity, int period, int scenario, int segment = 0) const;
  std::optional<int> row(RowFamily family, int entity, int period, int scenario, int sub = 0) const;
  const ColumnKey& column_key(int column) const { return column_keys_.at(column); }
  const RowKey& row_key(int row) const { return row_keys_.at(row); }
  std::size_t num_columns() const noexcept { return column_keys_.size(); }
  std::size_t num_rows() const noexcept { return row_keys_.size(); }
  std::size_t count_rows(RowFamily family) const;

  std::size_t num_generators = 0;
  std::size_t num_branches = 0;
  std::size_t num_buses = 0;
  std::size_t periods = 0;
  std::size_t first_period = 0;       // wall-clock index of model period 0
  std::vector<double> probabilities;  // per scenario (empty for a master)
  std::vector<double> period_weight;  // 0 for pinned periods
  std::vector<std::size_t> gen_bus;   // bus index per generator
  std::vector<double> gen_ptdf;       // [e * G + g]
  std::vector<double> flow_offset;    // [(s * T + t) * E + e], ptdf . load
  std::vector<double> bus_load;       // [(s * T + t) * N + i]
  std::vector<double> limit_lo, limit_hi;  // per branch
  std::vector<bool> monitored;             // per branch
  /// Columns of x1 in [g * 5 + product] order: the master's first stage, or
  /// the pinned period of a subproblem.
  std::vector<int> first_stage_columns;
  std::vector<int> consensus_rows;  // subproblem only, same order

  std::size_t scenarios() const noexcept { return probabilities.empty() ? 1 : probabilities.size(); }

 private:
  std::vector<ColumnKey> column_keys_;
  std::vector<RowKey> row_keys_;
  std::map<ColumnKey, int> columns_;
  std::map<RowKey, int> rows_;
};

struct DispatchModel {
  LinearProgram lp;
  VariableMap vmap;
};

enum class FlowMode : std::uint8_t {
  kFull,  // every monitored flowgate row is present
  kLazy,  // violation columns only; rows are added by separation
};

struct BuildOptions {
  FlowMode flows = FlowMode::kFull;
};

/// Affine under-estimator  theta_s >= rhs_const + coef_x1 . x1.
struct Cut {
  std::size_t scenario = 0;
  std::vector<double> coef_x1;
  double rhs_const = 0.0;
  std::size_t iteration = 0;
  bool from_core_point = false;

  double evaluate(std::span<const double> x1) const;
};

using CutPool = std::vector<std::vector<Cut>>;  // per scenario

/// Single-period dispatch against `current` (one period), ramp-coupled to
/// state.prev_dispatch.
DispatchModel build_sced(const ValidatedCase& vcase, const SystemState& state, const Scenario& current,
                         BuildOptions options = {});
DispatchModel build_sced(const ValidatedCase& vcase, const SystemState& state, std::span<const double> demand,
                         BuildOptions options = {});

/// Multi-period look-ahead on a single-scenario forecast whose period 0 holds
/// current telemetry. Uses the first `periods` periods of the forecast.
DispatchModel build_lad(const ValidatedCase& vcase, const SystemState& state, const ScenarioSet& forecast,
                        std::size_t periods, BuildOptions options = {});

/// Extensive form of the two-stage stochastic look-ahead: every period and
/// scenario, with period-0 decisions equalized across scenarios.
DispatchModel build_slad_extensive(const ValidatedCase& vcase, const SystemState& state, const ScenarioSet& scenarios,
                                   BuildOptions options = {});

/// Relaxed master: period-0 constraints, one theta column per scenario bounded
/// below by `theta_lower`, one row per cut. With no probabilities this is SCED.
DispatchModel build_benders_master(const ValidatedCase& vcase, const SystemState& state, const Scenario& current,
                                   std::span<const double> probabilities, const CutPool& cuts, double theta_lower,
                                   BuildOptions options = {});

/// Appends one cut row to a master model.
LinearRow cut_row(const VariableMap& vmap, const Cut& cut);
void register_cut_row(VariableMap& vmap, const Cut& cut, int row);

/// Recourse problem of scenario s: periods 1..T-1 plus a pinned copy of
/// period 0 whose consensus rows carry x1.
DispatchModel build_benders_subproblem(const ValidatedCase& vcase, const SystemState& state,
                                       const ScenarioSet& scenarios, std::size_t s, std::span<const double> x1,
                                       BuildOptions options = {});

/// Flowgate row of branch e at (t, s): the upper side reads
/// sum_g ptdf * pg - df <= limit_hi + ptdf . load, the lower side mirrors it.
/// Requires the model to hold a violation column for (e, t, s).
LinearRow flow_limit_row(const VariableMap& vmap, std::size_t e, std::size_t t, std::size_t s, bool upper);

/// Rewrites the consensus right-hand sides of a subproblem.
void set_consensus_point(DispatchModel& subproblem, std::span<const double> x1);

class SolveError : public std::runtime_error {
 public:
  SolveError(const std::string& what, LpStatus status) : std::runtime_error(what), status_(status) {}
  LpStatus status() const noexcept { return status_; }

 private:
  LpStatus status_;
};

/// Copies every mapped variable out; slacks below 1e-9 are clamped to 0.
/// Throws SolveError unless the solution is optimal.
DispatchSolution extract_dispatch(const LpSolution& sol, const VariableMap& vmap);

/// First-stage vector [g * 5 + product] read from a solved model.
std::vector<double> first_stage_vector(const LpSolution& sol, const VariableMap& vmap);

struct CostBreakdown {
  double energy = 0.0;  // excludes imports
  double import = 0.0;
  double no_load = 0.0;
  double reserves = 0.0;
  double penalty_balance = 0.0;
  double penalty_reserves = 0.0;
  double penalty_flow = 0.0;
  double total = 0.0;

  void finalize() { total = energy + import + no_load + reserves + penalty_balance + penalty_reserves + penalty_flow; }
  CostBreakdown& operator+=(const CostBreakdown& other);
};

/// Cost of a dispatch solution term by term, probability- and period-weighted
/// as in the model objective.
CostBreakdown itemize_costs(const DispatchSolution& d, const ValidatedCase& vcase);

/// Energy bid cost of one generator at output pg ($/h or $/period before the
/// time factor), filling segments in merit order.
double energy_bid_cost(const Generator& gen, double pg, bool committed);

struct RepricedPeriod {
  PeriodSlacks slacks;
  std::vector<double> flow;
  std::vector<double> flow_violation;
  CostBreakdown cost;
};

/// Prices binding decisions against realized demand: balance, reserve and
/// flow violations are recomputed rather than taken from the solve.
RepricedPeriod reprice_period(const ValidatedCase& vcase, std::span<const GeneratorPoint> points,
                              std::span<const double> demand, std::size_t wall_clock);

}  // namespace slad
