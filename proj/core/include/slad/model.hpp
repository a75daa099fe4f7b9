#pragma once

// Domain data model: static grid case, scenario trajectories, carried
// dispatch state and solved dispatch values.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace slad {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

class ParseError : public std::runtime_error {
 public:
  ParseError(std::string path, const std::string& message)
      : std::runtime_error(path.empty() ? message : path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> issues)
      : std::runtime_error(join(issues)), issues_(std::move(issues)) {}
  const std::vector<std::string>& issues() const noexcept { return issues_; }

 private:
  static std::string join(const std::vector<std::string>& issues);
  std::vector<std::string> issues_;
};

/// A per-period parameter. Indexing past the stored values repeats the last
/// one, so a single value describes a constant series.
template <typename T>
class PeriodSeries {
 public:
  PeriodSeries() : values_{T{}} {}
  PeriodSeries(T value) : values_{value} {}  // NOLINT(google-explicit-constructor)
  explicit PeriodSeries(std::vector<T> values) : values_(std::move(values)) {
    if (values_.empty()) throw std::invalid_argument("PeriodSeries needs at least one value");
  }

  T at(std::size_t period) const { return values_[std::min(period, values_.size() - 1)]; }
  const std::vector<T>& values() const noexcept { return values_; }
  bool is_constant() const {
    return std::all_of(values_.begin(), values_.end(), [&](const T& v) { return v == values_.front(); });
  }

  friend bool operator==(const PeriodSeries&, const PeriodSeries&) = default;

 private:
  std::vector<T> values_;
};

struct Bus {
  std::string id;
  friend bool operator==(const Bus&, const Bus&) = default;
};

struct BidSegment {
  double width = 0.0;  // MW
  double price = 0.0;  // $/MWh
  friend bool operator==(const BidSegment&, const BidSegment&) = default;
};

/// One value per reserve product.
struct ReserveProducts {
  double reg = 0.0;
  double spin = 0.0;
  double supp_on = 0.0;
  double supp_off = 0.0;
  friend bool operator==(const ReserveProducts&, const ReserveProducts&) = default;
};

struct GeneratorFlags {
  PeriodSeries<bool> commit{true};
  PeriodSeries<bool> regulation{true};
  PeriodSeries<bool> ra_reg{true};
  PeriodSeries<bool> ra_spin{true};
  PeriodSeries<bool> ra_s_on{true};
  PeriodSeries<bool> ra_s_off{true};
  friend bool operator==(const GeneratorFlags&, const GeneratorFlags&) = default;
};

struct Generator {
  std::string id;
  std::string bus;
  double pmin = 0.0;
  double pmax = 0.0;
  double initial_output = 0.0;
  double ramp_up = 0.0;    // MW/min
  double ramp_down = 0.0;  // MW/min
  std::vector<BidSegment> segments;
  double no_load_cost = 0.0;  // $/h
  // Unlisted caps are unlimited except offline supplemental, which defaults to 0.
  ReserveProducts reserve_caps{kInfinity, kInfinity, kInfinity, 0.0};
  ReserveProducts reserve_prices;
  GeneratorFlags flags;
  bool is_import = false;

  friend bool operator==(const Generator&, const Generator&) = default;
};

struct Branch {
  std::string id;
  std::map<std::string, double> ptdf;  // bus id -> shift factor
  double limit_lo = -kInfinity;
  double limit_hi = kInfinity;
  double violation_price = 1500.0;
  bool monitored = true;
  friend bool operator==(const Branch&, const Branch&) = default;
};

struct ReserveRequirements {
  PeriodSeries<double> reg{0.0};
  PeriodSeries<double> rspin{0.0};
  PeriodSeries<double> op{0.0};
  friend bool operator==(const ReserveRequirements&, const ReserveRequirements&) = default;
};

struct PenaltyPrices {
  double shortage = 100000.0;
  double surplus = 100000.0;
  double reg = 55000.0;
  double rspin = 50000.0;
  double op = 50000.0;
  friend bool operator==(const PenaltyPrices&, const PenaltyPrices&) = default;
};

/// How $/MW prices turn into period costs.
enum class CostBasis {
  kPerHour,    // prices are $/MWh; a period costs price * step_minutes / 60
  kPerPeriod,  // prices are charged once per period
};

struct SystemCase {
  std::vector<Bus> buses;
  std::vector<Generator> generators;
  std::vector<Branch> branches;
  ReserveRequirements reserve_req;
  PenaltyPrices penalties;
  double step_minutes = 5.0;
  double base_mva = 100.0;
  CostBasis cost_basis = CostBasis::kPerHour;

  /// Multiplier applied to $/MW rates for one period.
  double period_cost_factor() const {
    return cost_basis == CostBasis::kPerHour ? step_minutes / 60.0 : 1.0;
  }

  friend bool operator==(const SystemCase&, const SystemCase&) = default;
};

/// A case whose invariants have been checked, with derived index tables.
/// Only validate_case() produces one; every model builder takes one.
class ValidatedCase {
 public:
  const SystemCase& data() const noexcept { return *case_; }
  const SystemCase* operator->() const noexcept { return case_.get(); }

  std::size_t num_buses() const noexcept { return case_->buses.size(); }
  std::size_t num_generators() const noexcept { return case_->generators.size(); }
  std::size_t num_branches() const noexcept { return case_->branches.size(); }

  std::size_t generator_bus(std::size_t g) const { return generator_bus_.at(g); }
  /// Shift factor of branch e with respect to bus i.
  double ptdf(std::size_t e, std::size_t i) const { return ptdf_[e * num_buses() + i]; }
  std::optional<std::size_t> bus_index(const std::string& id) const;
  std::optional<std::size_t> generator_index(const std::string& id) const;

 private:
  friend ValidatedCase validate_case(SystemCase case_data);
  ValidatedCase() = default;

  std::shared_ptr<const SystemCase> case_;
  std::vector<std::size_t> generator_bus_;
  std::vector<double> ptdf_;
  std::map<std::string, std::size_t> bus_lookup_;
  std::map<std::string, std::size_t> generator_lookup_;
};

/// Checks every case invariant; throws ValidationError listing all failures.
ValidatedCase validate_case(SystemCase case_data);

/// Load and renewable trajectory of one scenario.
struct Scenario {
  std::string name;
  double prob = 1.0;
  std::vector<std::vector<double>> load;                      // [period][bus]
  std::map<std::size_t, std::vector<double>> pmax_override;  // generator -> [period]

  double total_load(std::size_t period) const;
  friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct ScenarioSet {
  std::size_t horizon = 0;
  std::vector<Scenario> scenarios;

  std::size_t size() const noexcept { return scenarios.size(); }
  /// Periods [first, first + count) of every scenario, probabilities kept.
  ScenarioSet slice(std::size_t first, std::size_t count) const;
  friend bool operator==(const ScenarioSet&, const ScenarioSet&) = default;
};

/// Throws ValidationError if probabilities, shapes or values are inconsistent
/// with the case.
void validate_scenarios(const ScenarioSet& set, const ValidatedCase& vcase);

/// Maximum output of generator g in the given scenario period.
double scenario_pmax(const Scenario& scenario, const Generator& gen, std::size_t g, std::size_t period);

struct SystemState {
  std::vector<double> prev_dispatch;  // MW, indexed like case generators
  std::size_t wall_clock = 0;         // period index within the day

  static SystemState initial(const ValidatedCase& vcase);
};

struct GeneratorPoint {
  double pg = 0.0;
  double reg = 0.0;
  double spin = 0.0;
  double supp_on = 0.0;
  double supp_off = 0.0;
};

struct PeriodSlacks {
  double surplus = 0.0;   // dp+
  double shortage = 0.0;  // dp-
  double reg = 0.0;
  double rspin = 0.0;
  double op = 0.0;
};

/// Dispatch values for every (generator, period, scenario) of a solved model.
struct DispatchSolution {
  std::size_t num_generators = 0;
  std::size_t num_branches = 0;
  std::size_t periods = 0;
  std::size_t first_period = 0;        // wall-clock index of model period 0
  std::vector<double> probabilities;   // per scenario
  std::vector<double> period_weight;   // 1 if the period is costed, 0 if pinned
  std::vector<GeneratorPoint> gen;     // [s][t][g]
  std::vector<PeriodSlacks> slack;     // [s][t]
  std::vector<double> flow;            // [s][t][e]
  std::vector<double> flow_violation;  // [s][t][e]
  double objective = 0.0;

  std::size_t scenarios() const noexcept { return probabilities.size(); }
  void resize(std::size_t generators, std::size_t branches, std::size_t num_periods, std::size_t num_scenarios);

  GeneratorPoint& at(std::size_t g, std::size_t t, std::size_t s) {
    return gen[(s * periods + t) * num_generators + g];
  }
  const GeneratorPoint& at(std::size_t g, std::size_t t, std::size_t s) const {
    return gen[(s * periods + t) * num_generators + g];
  }
  PeriodSlacks& slacks(std::size_t t, std::size_t s) { return slack[s * periods + t]; }
  const PeriodSlacks& slacks(std::size_t t, std::size_t s) const { return slack[s * periods + t]; }
  double& branch_flow(std::size_t e, std::size_t t, std::size_t s) {
    return flow[(s * periods + t) * num_branches + e];
  }
  double branch_flow(std::size_t e, std::size_t t, std::size_t s) const {
    return flow[(s * periods + t) * num_branches + e];
  }
  double& branch_violation(std::size_t e, std::size_t t, std::size_t s) {
    return flow_violation[(s * periods + t) * num_branches + e];
  }
  double branch_violation(std::size_t e, std::size_t t, std::size_t s) const {
    return flow_violation[(s * periods + t) * num_branches + e];
  }
  std::vector<double> pg_vector(std::size_t t = 0, std::size_t s = 0) const;
};

}  // namespace slad
