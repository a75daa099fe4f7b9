#include "slad/formulation.hpp"

#include <algorithm>
#include <cmath>

namespace slad {

// ---------------------------------------------------------------- VariableMap

int VariableMap::add_column(const ColumnKey& key, int column) {
  if (column != static_cast<int>(column_keys_.size())) throw std::logic_error("columns must be registered in order");
  if (!columns_.emplace(key, column).second) throw std::logic_error("duplicate column key");
  column_keys_.push_back(key);
  return column;
}

int VariableMap::add_row(const RowKey& key, int row) {
  if (row != static_cast<int>(row_keys_.size())) throw std::logic_error("rows must be registered in order");
  if (!rows_.emplace(key, row).second) throw std::logic_error("duplicate row key");
  row_keys_.push_back(key);
  return row;
}

std::optional<int> VariableMap::column(VarKind kind, int entity, int period, int scenario, int segment) const {
  auto it = columns_.find(ColumnKey{kind, entity, period, scenario, segment});
  if (it == columns_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> VariableMap::row(RowFamily family, int entity, int period, int scenario, int sub) const {
  auto it = rows_.find(RowKey{family, entity, period, scenario, sub});
  if (it == rows_.end()) return std::nullopt;
  return it->second;
}

std::size_t VariableMap::count_rows(RowFamily family) const {
  return static_cast<std::size_t>(
      std::count_if(row_keys_.begin(), row_keys_.end(), [&](const RowKey& k) { return k.family == family; }));
}

double Cut::evaluate(std::span<const double> x1) const {
  if (x1.size() != coef_x1.size()) throw std::invalid_argument("cut dimension mismatch");
  double v = rhs_const;
  for (std::size_t j = 0; j < x1.size(); ++j) v += coef_x1[j] * x1[j];
  return v;
}

CostBreakdown& CostBreakdown::operator+=(const CostBreakdown& o) {
  energy += o.energy;
  import += o.import;
  no_load += o.no_load;
  reserves += o.reserves;
  penalty_balance += o.penalty_balance;
  penalty_reserves += o.penalty_reserves;
  penalty_flow += o.penalty_flow;
  total += o.total;
  return *this;
}

namespace {

struct PeriodInput {
  const Scenario* scenario = nullptr;
  std::size_t scenario_period = 0;
  std::size_t wall = 0;  // wall-clock period for flags and requirements
  int t = 0;             // model period
  int s = 0;             // model scenario
  double weight = 0.0;   // multiplier on $/MW rates
  bool pinned = false;
};

class Builder {
 public:
  Builder(const ValidatedCase& vcase, const SystemState& state, BuildOptions options, std::size_t periods,
          std::size_t scenarios)
      : vc_(vcase), c_(vcase.data()), state_(state), opts_(options), T_(periods), S_(scenarios) {
    if (state.prev_dispatch.size() != vcase.num_generators())
      throw std::invalid_argument("state does not cover every generator");
    auto& vm = model_.vmap;
    const std::size_t G = vcase.num_generators(), E = vcase.num_branches(), N = vcase.num_buses();
    vm.num_generators = G;
    vm.num_branches = E;
    vm.num_buses = N;
    vm.periods = periods;
    vm.first_period = state.wall_clock;
    vm.period_weight.assign(periods, 1.0);
    for (std::size_t g = 0; g < G; ++g) vm.gen_bus.push_back(vcase.generator_bus(g));
    vm.gen_ptdf.assign(E * G, 0.0);
    for (std::size_t e = 0; e < E; ++e)
      for (std::size_t g = 0; g < G; ++g) vm.gen_ptdf[e * G + g] = vcase.ptdf(e, vcase.generator_bus(g));
    vm.flow_offset.assign(scenarios * periods * E, 0.0);
    vm.bus_load.assign(scenarios * periods * N, 0.0);
    for (const auto& br : c_.branches) {
      vm.limit_lo.push_back(br.limit_lo);
      vm.limit_hi.push_back(br.limit_hi);
      vm.monitored.push_back(br.monitored);
    }
    pg_.assign(scenarios * periods * G, -1);
  }

  DispatchModel finish() { return std::move(model_); }
  VariableMap& vmap() { return model_.vmap; }
  LinearProgram& lp() { return model_.lp; }

  int column(const ColumnKey& key, double lo, double hi, double cost) {
    const int j = model_.lp.add_variable(lo, hi, cost);
    return model_.vmap.add_column(key, j);
  }
  int row(const RowKey& key, LinearRow r) {
    const int i = model_.lp.add_row(std::move(r));
    return model_.vmap.add_row(key, i);
  }

  int pg_column(int g, int t, int s) const { return pg_[(static_cast<std::size_t>(s) * T_ + t) * vc_.num_generators() + g]; }

  // Adds every column and row of one (period, scenario). Returns the
  // first-stage columns [g * 5 + product] of this period.
  std::vector<int> add_period(const PeriodInput& in) {
    const std::size_t G = vc_.num_generators();
    std::vector<int> x1(G * kFirstStagePerGenerator, -1);
    record_loads(in);
    for (std::size_t g = 0; g < G; ++g) add_generator(in, g, x1);
    if (!in.pinned) add_system_rows(in, x1);
    return x1;
  }

 private:
  void record_loads(const PeriodInput& in) {
    auto& vm = model_.vmap;
    const std::size_t N = vc_.num_buses(), E = vc_.num_branches();
    const auto& load = in.scenario->load.at(in.scenario_period);
    const std::size_t base = static_cast<std::size_t>(in.s) * T_ + in.t;
    for (std::size_t i = 0; i < N; ++i) vm.bus_load[base * N + i] = load.at(i);
    for (std::size_t e = 0; e < E; ++e) {
      double off = 0.0;
      for (std::size_t i = 0; i < N; ++i) off += vc_.ptdf(e, i) * load[i];
      vm.flow_offset[base * E + e] = off;
    }
  }

  void add_generator(const PeriodInput& in, std::size_t gi, std::vector<int>& x1) {
    const Generator& gen = c_.generators[gi];
    const int g = static_cast<int>(gi);
    const int t = in.t, s = in.s;
    const std::size_t w = in.wall;
    int* out = &x1[gi * kFirstStagePerGenerator];

    if (in.pinned) {
      // Free copies of the first-stage decisions; consensus rows fix them.
      const VarKind kinds[] = {VarKind::kPg, VarKind::kReg, VarKind::kSpin, VarKind::kSuppOn, VarKind::kSuppOff};
      for (std::size_t p = 0; p < kFirstStagePerGenerator; ++p)
        out[p] = column({kinds[p], g, t, s}, -kInfinity, kInfinity, 0.0);
      pg_[(static_cast<std::size_t>(s) * T_ + t) * vc_.num_generators() + gi] = out[0];
      return;
    }

    const bool cf = gen.flags.commit.at(w);
    const double pmin = gen.pmin;
    const double pmax = scenario_pmax(*in.scenario, gen, gi, in.scenario_period);
    const double headroom = std::max(0.0, pmax - pmin);
    const double cfd = cf ? 1.0 : 0.0;
    const auto& caps = gen.reserve_caps;
    const auto& price = gen.reserve_prices;

    const int pg = column({VarKind::kPg, g, t, s}, 0.0, kInfinity, 0.0);
    pg_[(static_cast<std::size_t>(s) * T_ + t) * vc_.num_generators() + gi] = pg;
    model_.lp.objective_constant += in.weight * cfd * gen.no_load_cost;

    LinearRow target({{pg, 1.0}}, RowSense::kEqual, cfd * pmin);
    for (std::size_t k = 0; k < gen.segments.size(); ++k) {
      const int kk = static_cast<int>(k);
      const int seg = column({VarKind::kPgSegment, g, t, s, kk}, 0.0, cf ? kInfinity : 0.0,
                             in.weight * gen.segments[k].price);
      if (cf) row({RowFamily::kSegmentClearing, g, t, s, kk}, LinearRow({{seg, 1.0}}, RowSense::kLessEqual, gen.segments[k].width));
      target.add(seg, -1.0);
    }
    row({RowFamily::kDispatchTarget, g, t, s}, std::move(target));

    const bool reg_on = gen.flags.regulation.at(w) && gen.flags.ra_reg.at(w);
    const bool spin_on = cf && gen.flags.ra_spin.at(w);
    const bool son_on = cf && gen.flags.ra_s_on.at(w);
    const bool soff_on = !cf && gen.flags.ra_s_off.at(w);

    const int reg = column({VarKind::kReg, g, t, s}, 0.0, reg_on ? caps.reg : 0.0, in.weight * price.reg);
    const int spin = column({VarKind::kSpin, g, t, s}, 0.0, spin_on ? caps.spin : 0.0, in.weight * price.spin);
    const int son = column({VarKind::kSuppOn, g, t, s}, 0.0, son_on ? caps.supp_on : 0.0, in.weight * price.supp_on);
    const int soff = column({VarKind::kSuppOff, g, t, s}, 0.0, soff_on ? caps.supp_off : 0.0, in.weight * price.supp_off);
    out[0] = pg;
    out[1] = reg;
    out[2] = spin;
    out[3] = son;
    out[4] = soff;

    if (reg_on) {
      row({RowFamily::kRegCapacity, g, t, s}, LinearRow({{reg, 2.0}}, RowSense::kLessEqual, headroom));
      row({RowFamily::kRegRamp, g, t, s}, LinearRow({{reg, 1.0}}, RowSense::kLessEqual, 5.0 * gen.ramp_up));
    }
    if (spin_on) row({RowFamily::kSpinCapacity, g, t, s}, LinearRow({{spin, 1.0}}, RowSense::kLessEqual, headroom));
    if (son_on) row({RowFamily::kSuppOnCapacity, g, t, s}, LinearRow({{son, 1.0}}, RowSense::kLessEqual, headroom));
    if (soff_on)
      row({RowFamily::kSuppOffCapacity, g, t, s}, LinearRow({{soff, 1.0}}, RowSense::kLessEqual, caps.supp_off));
    if (spin_on || son_on)
      row({RowFamily::kContingencyRamp, g, t, s},
          LinearRow({{spin, 1.0}, {son, 1.0}}, RowSense::kLessEqual, 10.0 * gen.ramp_up));

    row({RowFamily::kMinLimit, g, t, s}, LinearRow({{pg, 1.0}, {reg, -1.0}}, RowSense::kGreaterEqual, cfd * pmin));
    row({RowFamily::kMaxLimit, g, t, s},
        LinearRow({{pg, 1.0}, {reg, 1.0}, {spin, 1.0}, {son, 1.0}}, RowSense::kLessEqual, cfd * pmax));

    // Ramp coupling to the previous model period, or to the carried state.
    const bool prev_cf = w == 0 ? cf : gen.flags.commit.at(w - 1);
    if (cf && prev_cf) {
      const double up = c_.step_minutes * gen.ramp_up;
      const double dn = c_.step_minutes * gen.ramp_down;
      if (t == 0) {
        const double prev = state_.prev_dispatch[gi];
        row({RowFamily::kRampUp, g, t, s}, LinearRow({{pg, 1.0}}, RowSense::kLessEqual, prev + up));
        row({RowFamily::kRampDown, g, t, s}, LinearRow({{pg, 1.0}}, RowSense::kGreaterEqual, prev - dn));
      } else {
        const int prev = pg_column(g, t - 1, s);
        row({RowFamily::kRampUp, g, t, s}, LinearRow({{pg, 1.0}, {prev, -1.0}}, RowSense::kLessEqual, up));
        row({RowFamily::kRampDown, g, t, s}, LinearRow({{pg, 1.0}, {prev, -1.0}}, RowSense::kGreaterEqual, -dn));
      }
    }
  }

  void add_system_rows(const PeriodInput& in, const std::vector<int>& x1) {
    const std::size_t G = vc_.num_generators();
    const int t = in.t, s = in.s;
    const auto& pen = c_.penalties;

    const int up = column({VarKind::kSurplus, -1, t, s}, 0.0, kInfinity, in.weight * pen.surplus);
    const int dn = column({VarKind::kShortage, -1, t, s}, 0.0, kInfinity, in.weight * pen.shortage);
    LinearRow balance;
    for (std::size_t g = 0; g < G; ++g) balance.add(x1[g * kFirstStagePerGenerator], 1.0);
    balance.add(up, -1.0);
    balance.add(dn, 1.0);
    balance.sense = RowSense::kEqual;
    balance.rhs = in.scenario->total_load(in.scenario_period);
    row({RowFamily::kPowerBalance, -1, t, s}, std::move(balance));

    struct Req {
      VarKind slack;
      RowFamily family;
      double requirement;
      double price;
      std::size_t products;  // leading first-stage products counted
    };
    const Req reqs[] = {
        {VarKind::kRegShortage, RowFamily::kRegRequirement, c_.reserve_req.reg.at(in.wall), pen.reg, 1},
        {VarKind::kRspinShortage, RowFamily::kRspinRequirement, c_.reserve_req.rspin.at(in.wall), pen.rspin, 2},
        {VarKind::kOpShortage, RowFamily::kOpRequirement, c_.reserve_req.op.at(in.wall), pen.op, 4},
    };
    for (const auto& req : reqs) {
      if (req.requirement <= 0.0) continue;
      const int slack = column({req.slack, -1, t, s}, 0.0, kInfinity, in.weight * req.price);
      LinearRow r;
      for (std::size_t g = 0; g < G; ++g)
        for (std::size_t p = 1; p <= req.products; ++p) r.add(x1[g * kFirstStagePerGenerator + p], 1.0);
      r.add(slack, 1.0);
      r.sense = RowSense::kGreaterEqual;
      r.rhs = req.requirement;
      row({req.family, -1, t, s}, std::move(r));
    }

    for (std::size_t e = 0; e < vc_.num_branches(); ++e) {
      const Branch& br = c_.branches[e];
      if (!br.monitored || (std::isinf(br.limit_lo) && std::isinf(br.limit_hi))) continue;
      column({VarKind::kFlowViolation, static_cast<int>(e), t, s}, 0.0, kInfinity, in.weight * br.violation_price);
      if (opts_.flows == FlowMode::kFull) {
        for (bool upper : {true, false}) {
          if (std::isinf(upper ? br.limit_hi : br.limit_lo)) continue;
          LinearRow r = flow_row(model_.vmap, e, static_cast<std::size_t>(t), static_cast<std::size_t>(s), upper);
          row({upper ? RowFamily::kFlowUpper : RowFamily::kFlowLower, static_cast<int>(e), t, s}, std::move(r));
        }
      }
    }
  }

 public:
  static LinearRow flow_row(const VariableMap& vm, std::size_t e, std::size_t t, std::size_t s, bool upper) {
    const std::size_t G = vm.num_generators;
    LinearRow r;
    for (std::size_t g = 0; g < G; ++g) {
      const double coef = vm.gen_ptdf[e * G + g];
      if (coef == 0.0) continue;
      r.add(*vm.column(VarKind::kPg, static_cast<int>(g), static_cast<int>(t), static_cast<int>(s)), coef);
    }
    const int viol = *vm.column(VarKind::kFlowViolation, static_cast<int>(e), static_cast<int>(t), static_cast<int>(s));
    const double offset = vm.flow_offset[(s * vm.periods + t) * vm.num_branches + e];
    if (upper) {
      r.add(viol, -1.0);
      r.sense = RowSense::kLessEqual;
      r.rhs = vm.limit_hi[e] + offset;
    } else {
      r.add(viol, 1.0);
      r.sense = RowSense::kGreaterEqual;
      r.rhs = vm.limit_lo[e] + offset;
    }
    return r;
  }

 private:
  const ValidatedCase& vc_;
  const SystemCase& c_;
  const SystemState& state_;
  BuildOptions opts_;
  std::size_t T_, S_;
  DispatchModel model_;
  std::vector<int> pg_;
};

Scenario single_period(std::span<const double> demand) {
  Scenario sc;
  sc.name = "current";
  sc.load.emplace_back(demand.begin(), demand.end());
  return sc;
}

void check_periods(const Scenario& sc, std::size_t periods, std::size_t buses) {
  if (sc.load.size() < periods) throw std::invalid_argument("scenario '" + sc.name + "' is shorter than the horizon");
  for (std::size_t t = 0; t < periods; ++t)
    if (sc.load[t].size() != buses) throw std::invalid_argument("scenario '" + sc.name + "' does not cover every bus");
}

}  // namespace

LinearRow flow_limit_row(const VariableMap& vmap, std::size_t e, std::size_t t, std::size_t s, bool upper) {
  return Builder::flow_row(vmap, e, t, s, upper);
}

// ---------------------------------------------------------------- builders

DispatchModel build_sced(const ValidatedCase& vcase, const SystemState& state, const Scenario& current,
                         BuildOptions options) {
  check_periods(current, 1, vcase.num_buses());
  Builder b(vcase, state, options, 1, 1);
  const double factor = vcase->period_cost_factor();
  b.vmap().probabilities = {1.0};
  b.vmap().first_stage_columns = b.add_period({&current, 0, state.wall_clock, 0, 0, factor, false});
  return b.finish();
}

DispatchModel build_sced(const ValidatedCase& vcase, const SystemState& state, std::span<const double> demand,
                         BuildOptions options) {
  return build_sced(vcase, state, single_period(demand), options);
}

DispatchModel build_lad(const ValidatedCase& vcase, const SystemState& state, const ScenarioSet& forecast,
                        std::size_t periods, BuildOptions options) {
  if (forecast.size() != 1) throw std::invalid_argument("look-ahead dispatch needs a single-scenario forecast");
  if (periods == 0) throw std::invalid_argument("look-ahead horizon must be at least one period");
  const Scenario& sc = forecast.scenarios.front();
  check_periods(sc, periods, vcase.num_buses());
  Builder b(vcase, state, options, periods, 1);
  const double factor = vcase->period_cost_factor();
  b.vmap().probabilities = {1.0};
  for (std::size_t t = 0; t < periods; ++t) {
    auto x1 = b.add_period({&sc, t, state.wall_clock + t, static_cast<int>(t), 0, factor, false});
    if (t == 0) b.vmap().first_stage_columns = std::move(x1);
  }
  return b.finish();
}

DispatchModel build_slad_extensive(const ValidatedCase& vcase, const SystemState& state, const ScenarioSet& scenarios,
                                   BuildOptions options) {
  if (scenarios.size() == 0) throw std::invalid_argument("stochastic dispatch needs at least one scenario");
  const std::size_t T = scenarios.horizon;
  if (T == 0) throw std::invalid_argument("stochastic dispatch needs at least one period");
  Builder b(vcase, state, options, T, scenarios.size());
  const double factor = vcase->period_cost_factor();
  for (const auto& sc : scenarios.scenarios) {
    check_periods(sc, T, vcase.num_buses());
    b.vmap().probabilities.push_back(sc.prob);
  }
  std::vector<int> root;
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    const Scenario& sc = scenarios.scenarios[s];
    for (std::size_t t = 0; t < T; ++t) {
      auto x1 = b.add_period({&sc, t, state.wall_clock + t, static_cast<int>(t), static_cast<int>(s), sc.prob * factor, false});
      if (t != 0) continue;
      if (s == 0) {
        root = x1;
        continue;
      }
      for (std::size_t j = 0; j < x1.size(); ++j) {
        const int g = static_cast<int>(j / kFirstStagePerGenerator);
        const int p = static_cast<int>(j % kFirstStagePerGenerator);
        b.row({RowFamily::kNonAnticipativity, g, 0, static_cast<int>(s), p},
              LinearRow({{x1[j], 1.0}, {root[j], -1.0}}, RowSense::kEqual, 0.0));
      }
    }
  }
  b.vmap().first_stage_columns = std::move(root);
  return b.finish();
}

LinearRow cut_row(const VariableMap& vmap, const Cut& cut) {
  if (cut.coef_x1.size() != vmap.first_stage_columns.size()) throw std::invalid_argument("cut dimension mismatch");
  const auto theta = vmap.column(VarKind::kTheta, static_cast<int>(cut.scenario), 0, 0);
  if (!theta) throw std::invalid_argument("cut refers to a scenario without a theta column");
  LinearRow r;
  r.add(*theta, 1.0);
  for (std::size_t j = 0; j < cut.coef_x1.size(); ++j)
    if (cut.coef_x1[j] != 0.0) r.add(vmap.first_stage_columns[j], -cut.coef_x1[j]);
  r.sense = RowSense::kGreaterEqual;
  r.rhs = cut.rhs_const;
  return r;
}

void register_cut_row(VariableMap& vmap, const Cut& cut, int row) {
  vmap.add_row({RowFamily::kBendersCut, static_cast<int>(cut.scenario), 0, 0, row}, row);
}

DispatchModel build_benders_master(const ValidatedCase& vcase, const SystemState& state, const Scenario& current,
                                   std::span<const double> probabilities, const CutPool& cuts, double theta_lower,
                                   BuildOptions options) {
  check_periods(current, 1, vcase.num_buses());
  Builder b(vcase, state, options, 1, 1);
  const double factor = vcase->period_cost_factor();
  b.vmap().probabilities = {1.0};
  b.vmap().first_stage_columns = b.add_period({&current, 0, state.wall_clock, 0, 0, factor, false});
  for (std::size_t s = 0; s < probabilities.size(); ++s)
    b.column({VarKind::kTheta, static_cast<int>(s), 0, 0}, theta_lower, kInfinity, probabilities[s]);
  for (const auto& pool : cuts)
    for (const auto& cut : pool) {
      if (cut.scenario >= probabilities.size()) throw std::invalid_argument("cut scenario out of range");
      const int i = b.lp().add_row(cut_row(b.vmap(), cut));
      register_cut_row(b.vmap(), cut, i);
    }
  return b.finish();
}

DispatchModel build_benders_subproblem(const ValidatedCase& vcase, const SystemState& state,
                                       const ScenarioSet& scenarios, std::size_t s, std::span<const double> x1,
                                       BuildOptions options) {
  if (s >= scenarios.size()) throw std::invalid_argument("scenario index out of range");
  const std::size_t T = scenarios.horizon;
  if (T == 0) throw std::invalid_argument("subproblem needs at least one period");
  const Scenario& sc = scenarios.scenarios[s];
  check_periods(sc, T, vcase.num_buses());
  if (x1.size() != vcase.num_generators() * kFirstStagePerGenerator)
    throw std::invalid_argument("first-stage vector has the wrong dimension");
  Builder b(vcase, state, options, T, 1);
  const double factor = vcase->period_cost_factor();
  b.vmap().probabilities = {1.0};
  b.vmap().period_weight[0] = 0.0;
  auto pinned = b.add_period({&sc, 0, state.wall_clock, 0, 0, 0.0, true});
  for (std::size_t j = 0; j < pinned.size(); ++j) {
    const int g = static_cast<int>(j / kFirstStagePerGenerator);
    const int p = static_cast<int>(j % kFirstStagePerGenerator);
    b.vmap().consensus_rows.push_back(
        b.row({RowFamily::kConsensus, g, 0, 0, p}, LinearRow({{pinned[j], 1.0}}, RowSense::kEqual, x1[j])));
  }
  b.vmap().first_stage_columns = std::move(pinned);
  for (std::size_t t = 1; t < T; ++t)
    b.add_period({&sc, t, state.wall_clock + t, static_cast<int>(t), 0, factor, false});
  return b.finish();
}

void set_consensus_point(DispatchModel& subproblem, std::span<const double> x1) {
  const auto& rows = subproblem.vmap.consensus_rows;
  if (rows.size() != x1.size()) throw std::invalid_argument("first-stage vector has the wrong dimension");
  for (std::size_t j = 0; j < rows.size(); ++j) subproblem.lp.set_rhs(rows[j], x1[j]);
}

// ---------------------------------------------------------------- extraction

DispatchSolution extract_dispatch(const LpSolution& sol, const VariableMap& vmap) {
  if (sol.status != LpStatus::kOptimal)
    throw SolveError("no solution to extract (status: " + std::string(to_string(sol.status)) + ")", sol.status);
  if (sol.primal.size() < vmap.num_columns()) throw std::invalid_argument("solution does not match the model");
  DispatchSolution d;
  const std::size_t S = vmap.scenarios(), T = vmap.periods, G = vmap.num_generators, E = vmap.num_branches;
  d.resize(G, E, T, S);
  d.first_period = vmap.first_period;
  d.probabilities = vmap.probabilities;
  d.period_weight = vmap.period_weight;
  d.objective = sol.objective;
  auto slack = [](double v) { return v < 1e-9 ? 0.0 : v; };
  for (std::size_t j = 0; j < vmap.num_columns(); ++j) {
    const ColumnKey& k = vmap.column_key(static_cast<int>(j));
    const double v = sol.primal[j];
    if (k.kind == VarKind::kTheta || k.kind == VarKind::kPgSegment) continue;
    const std::size_t t = static_cast<std::size_t>(k.period), s = static_cast<std::size_t>(k.scenario);
    switch (k.kind) {
      case VarKind::kPg: d.at(k.entity, t, s).pg = v; break;
      case VarKind::kReg: d.at(k.entity, t, s).reg = v; break;
      case VarKind::kSpin: d.at(k.entity, t, s).spin = v; break;
      case VarKind::kSuppOn: d.at(k.entity, t, s).supp_on = v; break;
      case VarKind::kSuppOff: d.at(k.entity, t, s).supp_off = v; break;
      case VarKind::kSurplus: d.slacks(t, s).surplus = slack(v); break;
      case VarKind::kShortage: d.slacks(t, s).shortage = slack(v); break;
      case VarKind::kRegShortage: d.slacks(t, s).reg = slack(v); break;
      case VarKind::kRspinShortage: d.slacks(t, s).rspin = slack(v); break;
      case VarKind::kOpShortage: d.slacks(t, s).op = slack(v); break;
      case VarKind::kFlowViolation: d.branch_violation(k.entity, t, s) = slack(v); break;
      default: break;
    }
  }
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t e = 0; e < E; ++e) {
        double f = -vmap.flow_offset[(s * T + t) * E + e];
        for (std::size_t g = 0; g < G; ++g) f += vmap.gen_ptdf[e * G + g] * d.at(g, t, s).pg;
        d.branch_flow(e, t, s) = f;
      }
  return d;
}

std::vector<double> first_stage_vector(const LpSolution& sol, const VariableMap& vmap) {
  std::vector<double> x(vmap.first_stage_columns.size());
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = sol.primal.at(vmap.first_stage_columns[j]);
  return x;
}

// ---------------------------------------------------------------- costs

double energy_bid_cost(const Generator& gen, double pg, bool committed) {
  double remaining = pg - (committed ? gen.pmin : 0.0);
  double cost = 0.0;
  for (const auto& seg : gen.segments) {
    if (remaining <= 0.0) break;
    const double take = std::min(remaining, seg.width);
    cost += take * seg.price;
    remaining -= take;
  }
  return cost;
}

namespace {

void add_generator_costs(CostBreakdown& c, const Generator& gen, const GeneratorPoint& p, bool committed, double w) {
  const double energy = w * energy_bid_cost(gen, p.pg, committed);
  (gen.is_import ? c.import : c.energy) += energy;
  c.no_load += w * (committed ? gen.no_load_cost : 0.0);
  const auto& pr = gen.reserve_prices;
  c.reserves += w * (pr.reg * p.reg + pr.spin * p.spin + pr.supp_on * p.supp_on + pr.supp_off * p.supp_off);
}

void add_slack_costs(CostBreakdown& c, const PenaltyPrices& pen, const PeriodSlacks& sl, double w) {
  c.penalty_balance += w * (pen.surplus * sl.surplus + pen.shortage * sl.shortage);
  c.penalty_reserves += w * (pen.reg * sl.reg + pen.rspin * sl.rspin + pen.op * sl.op);
}

}  // namespace

CostBreakdown itemize_costs(const DispatchSolution& d, const ValidatedCase& vcase) {
  const SystemCase& c = vcase.data();
  const double factor = c.period_cost_factor();
  CostBreakdown out;
  for (std::size_t s = 0; s < d.scenarios(); ++s)
    for (std::size_t t = 0; t < d.periods; ++t) {
      const double w = d.probabilities[s] * d.period_weight.at(t) * factor;
      if (w == 0.0) continue;
      const std::size_t wall = d.first_period + t;
      for (std::size_t g = 0; g < d.num_generators; ++g) {
        const Generator& gen = c.generators[g];
        add_generator_costs(out, gen, d.at(g, t, s), gen.flags.commit.at(wall), w);
      }
      add_slack_costs(out, c.penalties, d.slacks(t, s), w);
      for (std::size_t e = 0; e < d.num_branches; ++e)
        out.penalty_flow += w * c.branches[e].violation_price * d.branch_violation(e, t, s);
    }
  out.finalize();
  return out;
}

RepricedPeriod reprice_period(const ValidatedCase& vcase, std::span<const GeneratorPoint> points,
                              std::span<const double> demand, std::size_t wall_clock) {
  const SystemCase& c = vcase.data();
  const std::size_t G = vcase.num_generators(), N = vcase.num_buses(), E = vcase.num_branches();
  if (points.size() != G || demand.size() != N) throw std::invalid_argument("reprice_period: dimension mismatch");
  const double w = c.period_cost_factor();
  RepricedPeriod r;

  std::vector<double> injection(N, 0.0);
  double total_gen = 0.0, reg = 0.0, spin = 0.0, son = 0.0, soff = 0.0;
  for (std::size_t g = 0; g < G; ++g) {
    const auto& p = points[g];
    injection[vcase.generator_bus(g)] += p.pg;
    total_gen += p.pg;
    reg += p.reg;
    spin += p.spin;
    son += p.supp_on;
    soff += p.supp_off;
    add_generator_costs(r.cost, c.generators[g], p, c.generators[g].flags.commit.at(wall_clock), w);
  }
  double total_load = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    injection[i] -= demand[i];
    total_load += demand[i];
  }
  const double mismatch = total_gen - total_load;
  r.slacks.surplus = std::max(0.0, mismatch);
  r.slacks.shortage = std::max(0.0, -mismatch);
  r.slacks.reg = std::max(0.0, c.reserve_req.reg.at(wall_clock) - reg);
  r.slacks.rspin = std::max(0.0, c.reserve_req.rspin.at(wall_clock) - reg - spin);
  r.slacks.op = std::max(0.0, c.reserve_req.op.at(wall_clock) - reg - spin - son - soff);
  add_slack_costs(r.cost, c.penalties, r.slacks, w);

  r.flow.assign(E, 0.0);
  r.flow_violation.assign(E, 0.0);
  for (std::size_t e = 0; e < E; ++e) {
    for (std::size_t i = 0; i < N; ++i) r.flow[e] += vcase.ptdf(e, i) * injection[i];
    const Branch& br = c.branches[e];
    if (!br.monitored) continue;
    r.flow_violation[e] = std::max({0.0, r.flow[e] - br.limit_hi, br.limit_lo - r.flow[e]});
    r.cost.penalty_flow += w * br.violation_price * r.flow_violation[e];
  }
  r.cost.finalize();
  return r;
}

}  // namespace slad
