#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "slad/benders.hpp"
#include "slad/case_io.hpp"
#include "slad/forecast.hpp"
#include "slad/formulation.hpp"
#include "slad/simulator.hpp"

namespace slad::cli {

namespace {

using json = nlohmann::ordered_json;
constexpr int kSchemaVersion = 1;

struct Options {
  std::string case_path;
  std::string scenarios_path;
  std::string history_path;
  std::string day_path;
  std::string demand;
  std::string out_path;
  std::string format = "json";
  std::string policy = "sced";
  std::string policies = "sced,lad,slad,pd";
  std::string source = "file";
  std::vector<std::string> logs;
  std::size_t period = 1;
  std::size_t horizon = 12;
  std::size_t max_iter = 100;
  std::size_t workers = 1;
  std::size_t knn_k = 10;
  std::size_t knn_window = 0;
  std::size_t sample = 0;
  double alpha = 0.5;
  double epsilon = 1e-5;
  std::uint64_t seed = 0;
  bool extensive = false;
  bool timings = false;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void emit(const std::string& text, const Options& o, std::ostream& out) {
  if (o.out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(o.out_path, std::ios::binary);
  if (!f) throw DataError("cannot write '" + o.out_path + "'");
  f << text;
}

std::string csv_number(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

json cost_json(const CostBreakdown& c) {
  return json{{"energy", c.energy},
              {"import", c.import},
              {"no_load", c.no_load},
              {"reserves", c.reserves},
              {"penalty_balance", c.penalty_balance},
              {"penalty_reserves", c.penalty_reserves},
              {"penalty_flow", c.penalty_flow},
              {"total", c.total}};
}

CostBreakdown cost_from_json(const json& j) {
  CostBreakdown c;
  c.energy = j.at("energy").get<double>();
  c.import = j.at("import").get<double>();
  c.no_load = j.at("no_load").get<double>();
  c.reserves = j.at("reserves").get<double>();
  c.penalty_balance = j.at("penalty_balance").get<double>();
  c.penalty_reserves = j.at("penalty_reserves").get<double>();
  c.penalty_flow = j.at("penalty_flow").get<double>();
  c.finalize();
  return c;
}

const char* const kCostColumns = "energy,import,no_load,reserves,penalty_balance,penalty_reserves,penalty_flow,total";

std::string cost_csv(const CostBreakdown& c) {
  return csv_number(c.energy) + "," + csv_number(c.import) + "," + csv_number(c.no_load) + "," +
         csv_number(c.reserves) + "," + csv_number(c.penalty_balance) + "," + csv_number(c.penalty_reserves) + "," +
         csv_number(c.penalty_flow) + "," + csv_number(c.total);
}

json slacks_json(const PeriodSlacks& s) {
  return json{{"surplus", s.surplus},
              {"shortage", s.shortage},
              {"reg_shortage", s.reg},
              {"rspin_shortage", s.rspin},
              {"op_shortage", s.op}};
}

std::string day_label(const Options& o) {
  return o.day_path.empty() ? std::string("day") : std::filesystem::path(o.day_path).stem().string();
}

BendersConfig benders_config(const Options& o) {
  BendersConfig cfg;
  cfg.alpha = o.alpha;
  cfg.epsilon = o.epsilon;
  cfg.max_iter = o.max_iter;
  cfg.workers = o.workers;
  cfg.validate();
  return cfg;
}

PolicySpec policy_spec(const Options& o, PolicyKind kind) {
  PolicySpec p;
  p.kind = kind;
  p.horizon = o.horizon;
  p.source = parse_source(o.source);
  p.benders = benders_config(o);
  p.use_benders = !o.extensive;
  p.knn_k = o.knn_k;
  p.knn_window = o.knn_window;
  p.sample = o.sample;
  return p;
}

struct Inputs {
  std::optional<ValidatedCase> vcase;
  std::optional<ScenarioSet> day;
  std::optional<ScenarioSet> scenarios;
  std::optional<HistoryStore> history;

  const ValidatedCase& vc() const { return *vcase; }
  Forecaster forecaster() const {
    return {scenarios ? &*scenarios : nullptr, history ? &*history : nullptr};
  }
};

Inputs load_inputs(const Options& o) {
  Inputs in;
  in.vcase.emplace(validate_case(load_case_file(o.case_path)));
  if (!o.day_path.empty()) in.day = load_timeseries_file(o.day_path, in.vc());
  if (!o.scenarios_path.empty()) in.scenarios = load_timeseries_file(o.scenarios_path, in.vc());
  if (!o.history_path.empty()) in.history = load_history_file(o.history_path, in.vc());
  return in;
}

// ---------------------------------------------------------------- solve

Scenario current_measurement(const Options& o, const Inputs& in, std::size_t& period) {
  period = o.period;
  std::string demand_text = o.demand;
  if (!demand_text.empty() && (demand_text[0] == 't' || demand_text[0] == 'T')) {
    period = std::stoul(demand_text.substr(1));
    demand_text.clear();
  }
  if (period == 0) throw DataError("periods are numbered from 1");
  Scenario cur;
  cur.name = "current";
  if (!demand_text.empty()) {
    std::vector<double> load;
    std::stringstream ss(demand_text);
    std::string item;
    while (std::getline(ss, item, ',')) load.push_back(std::stod(item));
    if (load.size() != in.vc().num_buses())
      throw DataError("--demand needs one value per bus (" + std::to_string(in.vc().num_buses()) + ")");
    cur.load.push_back(std::move(load));
    return cur;
  }
  const ScenarioSet* src = in.day ? &*in.day : (in.scenarios ? &*in.scenarios : nullptr);
  if (!src) throw DataError("solve needs --demand, --day or --scenarios");
  if (period > src->horizon) throw DataError("period " + std::to_string(period) + " is past the end of the data");
  return src->slice(period - 1, 1).scenarios.front();
}

void pin_first_period(ScenarioSet& set, const Scenario& current) {
  for (auto& sc : set.scenarios) {
    sc.load.at(0) = current.load.at(0);
    for (const auto& [g, series] : current.pmax_override) {
      auto& mine = sc.pmax_override[g];
      if (mine.size() != sc.load.size()) mine.assign(sc.load.size(), series.at(0));
      mine[0] = series.at(0);
    }
  }
}

DispatchSolution mask_later_periods(DispatchSolution d) {
  for (std::size_t t = 1; t < d.period_weight.size(); ++t) d.period_weight[t] = 0.0;
  return d;
}

int cmd_solve(const Options& o, std::ostream& out) {
  const Inputs in = load_inputs(o);
  const ValidatedCase& vc = in.vc();
  const PolicyKind kind = parse_policy(o.policy);
  std::size_t period = 1;
  const Scenario current = current_measurement(o, in, period);
  SystemState state = SystemState::initial(vc);
  state.wall_clock = period - 1;

  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["command"] = "solve";
  doc["policy"] = std::string(to_string(kind));
  doc["period"] = period;

  DispatchSolution d;
  std::optional<BendersResult> benders;
  std::size_t horizon = 1;
  std::size_t scenario_count = 1;
  if (kind == PolicyKind::kSced) {
    const DispatchModel m = build_sced(vc, state, current);
    d = extract_dispatch(solve_lp(m.lp), m.vmap);
  } else if (kind == PolicyKind::kPlad || kind == PolicyKind::kPd) {
    if (!in.day) throw DataError(std::string(to_string(kind)) + " needs --day");
    horizon = kind == PolicyKind::kPd ? in.day->horizon - (period - 1)
                                      : std::min(o.horizon, in.day->horizon - (period - 1));
    const ScenarioSet view = in.day->slice(period - 1, horizon);
    const DispatchModel m = build_lad(vc, state, view, horizon);
    d = extract_dispatch(solve_lp(m.lp), m.vmap);
  } else {
    if (!in.scenarios) throw DataError(std::string(to_string(kind)) + " needs --scenarios");
    if (period > in.scenarios->horizon) throw DataError("scenario file ends before the requested period");
    horizon = std::min(o.horizon, in.scenarios->horizon - (period - 1));
    ScenarioSet view = in.scenarios->slice(period - 1, horizon);
    if (kind == PolicyKind::kLad) view = mean_forecast(view);
    pin_first_period(view, current);
    scenario_count = view.size();
    if (kind == PolicyKind::kLad) {
      const DispatchModel m = build_lad(vc, state, view, horizon);
      d = extract_dispatch(solve_lp(m.lp), m.vmap);
    } else if (o.extensive) {
      const DispatchModel m = build_slad_extensive(vc, state, view);
      d = extract_dispatch(solve_lp(m.lp), m.vmap);
    } else {
      benders = run_benders(vc, state, view, benders_config(o));
      d = benders->first_stage;
    }
  }
  doc["horizon"] = horizon;
  doc["scenarios"] = scenario_count;
  doc["objective"] = d.objective;

  const CostBreakdown first = itemize_costs(mask_later_periods(d), vc);
  doc["first_period_cost"] = first.total;
  doc["cost"] = cost_json(first);
  json gens = json::array();
  for (std::size_t g = 0; g < vc.num_generators(); ++g) {
    const auto& p = d.at(g, 0, 0);
    gens.push_back(json{{"id", vc->generators[g].id},
                        {"pg", p.pg},
                        {"reg", p.reg},
                        {"spin", p.spin},
                        {"supp_on", p.supp_on},
                        {"supp_off", p.supp_off}});
  }
  doc["dispatch"] = gens;
  doc["slacks"] = slacks_json(d.slacks(0, 0));
  json flows = json::array();
  for (std::size_t e = 0; e < vc.num_branches(); ++e)
    flows.push_back(json{{"id", vc->branches[e].id}, {"flow", d.branch_flow(e, 0, 0)}, {"violation", d.branch_violation(e, 0, 0)}});
  doc["flows"] = flows;

  int code = kOk;
  if (benders) {
    const auto& st = benders->state;
    json trace = json::array();
    for (const auto& h : st.history) {
      json row{{"iteration", h.iteration}, {"lb", h.lb}, {"ub", h.ub}, {"gap", h.gap}, {"cuts_added", h.cuts_added}};
      if (o.timings) row["wall_ms"] = h.wall_ms;
      trace.push_back(row);
    }
    doc["benders"] = json{{"status", std::string(to_string(st.status))},
                          {"iterations", st.iteration},
                          {"lb", st.lb},
                          {"ub", st.ub},
                          {"gap", st.gap()},
                          {"trace", trace}};
    if (st.status == BendersStatus::kIterationLimit) code = kIterationLimit;
  }

  if (o.format == "json") {
    emit(doc.dump(2) + "\n", o, out);
  } else {
    std::ostringstream os;
    os << "generator,pg,reg,spin,supp_on,supp_off\n";
    for (const auto& g : doc["dispatch"])
      os << g["id"].get<std::string>() << ',' << csv_number(g["pg"]) << ',' << csv_number(g["reg"]) << ','
         << csv_number(g["spin"]) << ',' << csv_number(g["supp_on"]) << ',' << csv_number(g["supp_off"]) << '\n';
    os << "\nmetric,value\n";
    os << "schema_version," << kSchemaVersion << "\n";
    os << "policy," << doc["policy"].get<std::string>() << "\n";
    os << "objective," << csv_number(d.objective) << "\n";
    os << "first_period_cost," << csv_number(first.total) << "\n";
    for (const auto& [k, v] : doc["slacks"].items()) os << k << ',' << csv_number(v) << '\n';
    if (benders) {
      os << "benders_status," << to_string(benders->state.status) << "\n";
      os << "benders_iterations," << benders->state.iteration << "\n";
    }
    emit(os.str(), o, out);
  }
  return code;
}

// ---------------------------------------------------------------- simulate

json log_json(const SimulationLog& log, const ValidatedCase& vc, const std::string& day, std::uint64_t seed,
              bool timings) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["command"] = "simulate";
  doc["day"] = day;
  doc["policy"] = std::string(to_string(log.policy.kind));
  doc["horizon"] = log.policy.horizon;
  doc["source"] = std::string(to_string(log.policy.source));
  doc["seed"] = seed;
  json gens = json::array();
  for (const auto& g : vc->generators) gens.push_back(g.id);
  doc["generators"] = gens;
  json steps = json::array();
  for (const auto& s : log.steps) {
    json pg = json::array(), reserves = json::array();
    for (const auto& p : s.binding) {
      pg.push_back(p.pg);
      reserves.push_back(json::array({p.reg, p.spin, p.supp_on, p.supp_off}));
    }
    json row{{"period", s.period + 1},
             {"demand", s.demand},
             {"pg", pg},
             {"reserves", reserves},
             {"slacks", slacks_json(s.slacks)},
             {"cost", cost_json(s.cost)},
             {"available_capacity", s.capacity.total},
             {"capacity_slow", s.capacity.slow},
             {"capacity_fast", s.capacity.fast},
             {"solve_objective", s.solve_objective},
             {"scenarios", s.scenarios},
             {"benders_iterations", s.benders_iterations},
             {"iteration_limit", s.iteration_limit}};
    if (timings) row["solve_ms"] = s.solve_ms;
    steps.push_back(row);
  }
  doc["steps"] = steps;
  doc["totals"] = cost_json(log.totals);
  return doc;
}

std::string log_csv(const SimulationLog& log, const ValidatedCase& vc, bool timings) {
  std::ostringstream os;
  const std::string policy(to_string(log.policy.kind));
  os << "# schema_version=" << kSchemaVersion << "\n";
  os << "period,policy,demand";
  for (const auto& g : vc->generators) os << ",pg:" << g.id;
  os << ",surplus,shortage,reg_shortage,rspin_shortage,op_shortage," << kCostColumns
     << ",available_capacity,capacity_slow,capacity_fast,solve_objective,scenarios,benders_iterations";
  if (timings) os << ",solve_ms";
  os << "\n";
  for (const auto& s : log.steps) {
    os << s.period + 1 << ',' << policy << ',' << csv_number(s.demand);
    for (const auto& p : s.binding) os << ',' << csv_number(p.pg);
    os << ',' << csv_number(s.slacks.surplus) << ',' << csv_number(s.slacks.shortage) << ',' << csv_number(s.slacks.reg)
       << ',' << csv_number(s.slacks.rspin) << ',' << csv_number(s.slacks.op) << ',' << cost_csv(s.cost) << ','
       << csv_number(s.capacity.total) << ',' << csv_number(s.capacity.slow) << ',' << csv_number(s.capacity.fast)
       << ',' << csv_number(s.solve_objective) << ',' << s.scenarios << ',' << s.benders_iterations;
    if (timings) os << ',' << csv_number(s.solve_ms);
    os << "\n";
  }
  os << "total," << policy << ',';
  for (std::size_t g = 0; g <= vc.num_generators(); ++g) os << ',';
  os << ",,,,," << cost_csv(log.totals) << ",,,,,,";
  if (timings) os << ',';
  os << "\n";
  return os.str();
}

SimulationLog simulate_policy(const Options& o, const Inputs& in, PolicyKind kind) {
  if (!in.day) throw DataError("simulation needs --day");
  return run_simulation(in.vc(), *in.day, policy_spec(o, kind), in.forecaster(), o.seed);
}

bool hit_limit(const SimulationLog& log) {
  return std::any_of(log.steps.begin(), log.steps.end(), [](const SimulationStep& s) { return s.iteration_limit; });
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const Inputs in = load_inputs(o);
  const SimulationLog log = simulate_policy(o, in, parse_policy(o.policy));
  if (o.format == "json") emit(log_json(log, in.vc(), day_label(o), o.seed, o.timings).dump(2) + "\n", o, out);
  else emit(log_csv(log, in.vc(), o.timings), o, out);
  return hit_limit(log) ? kIterationLimit : kOk;
}

// ---------------------------------------------------------------- compare

std::vector<PolicyKind> policy_list(const std::string& text) {
  std::vector<PolicyKind> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(parse_policy(item));
  if (out.empty()) throw DataError("--policies is empty");
  return out;
}

int cmd_compare(const Options& o, std::ostream& out) {
  const Inputs in = load_inputs(o);
  const auto kinds = policy_list(o.policies);
  std::vector<std::pair<PolicyKind, SimulationLog>> runs;
  bool limited = false;
  for (PolicyKind k : kinds) {
    runs.emplace_back(k, simulate_policy(o, in, k));
    limited = limited || hit_limit(runs.back().second);
  }
  double sced_total = 0.0;
  auto sced = std::find_if(runs.begin(), runs.end(), [](const auto& r) { return r.first == PolicyKind::kSced; });
  if (sced != runs.end()) sced_total = sced->second.totals.total;
  else sced_total = simulate_policy(o, in, PolicyKind::kSced).totals.total;

  json rows = json::array();
  std::ostringstream csv;
  csv << "# schema_version=" << kSchemaVersion << "\n";
  csv << "policy," << kCostColumns << ",savings\n";
  for (const auto& [k, log] : runs) {
    const double savings = daily_savings(log.totals.total, sced_total);
    json row{{"policy", std::string(to_string(k))}, {"cost", cost_json(log.totals)}, {"savings", savings}};
    rows.push_back(row);
    csv << to_string(k) << ',' << cost_csv(log.totals) << ',' << csv_number(savings) << "\n";
  }
  if (o.format == "json") {
    json doc{{"schema_version", kSchemaVersion},
             {"command", "compare"},
             {"day", day_label(o)},
             {"baseline", "SCED"},
             {"rows", rows}};
    emit(doc.dump(2) + "\n", o, out);
  } else {
    emit(csv.str(), o, out);
  }
  return limited ? kIterationLimit : kOk;
}

// ---------------------------------------------------------------- report

int cmd_report(const Options& o, std::ostream& out) {
  if (o.logs.empty()) throw DataError("report needs at least one --logs file");
  // day -> policy -> summed step costs
  std::map<std::string, std::map<std::string, CostBreakdown>> table;
  std::vector<std::string> policy_order;
  for (const auto& path : o.logs) {
    json doc;
    try {
      doc = json::parse(read_text_file(path));
    } catch (const json::exception& ex) {
      throw DataError(path + ": " + ex.what());
    }
    if (doc.value("command", "") != "simulate") throw DataError(path + ": not a simulation log");
    const std::string day = doc.at("day").get<std::string>();
    const std::string policy = doc.at("policy").get<std::string>();
    CostBreakdown sum;
    for (const auto& step : doc.at("steps")) sum += cost_from_json(step.at("cost"));
    sum.finalize();
    table[day][policy] = sum;
    if (std::find(policy_order.begin(), policy_order.end(), policy) == policy_order.end()) policy_order.push_back(policy);
  }

  std::map<std::string, double> grand;
  json days = json::array();
  std::ostringstream csv;
  csv << "# schema_version=" << kSchemaVersion << "\nday";
  for (const auto& p : policy_order) csv << ",cost:" << p;
  for (const auto& p : policy_order) csv << ",savings:" << p;
  csv << "\n";
  auto savings_of = [](double x, const std::map<std::string, double>& costs) -> json {
    auto it = costs.find("SCED");
    if (it == costs.end() || !(it->second > 0.0)) return nullptr;
    return daily_savings(x, it->second);
  };
  for (const auto& [day, per_policy] : table) {
    std::map<std::string, double> costs;
    for (const auto& [p, c] : per_policy) {
      costs[p] = c.total;
      grand[p] += c.total;
    }
    json jc = json::object(), js = json::object();
    csv << day;
    for (const auto& p : policy_order) {
      if (costs.count(p)) jc[p] = costs[p];
      csv << ',' << (costs.count(p) ? csv_number(costs[p]) : "");
    }
    for (const auto& p : policy_order) {
      const json s = costs.count(p) ? savings_of(costs[p], costs) : json(nullptr);
      if (!s.is_null()) js[p] = s;
      csv << ',' << (s.is_null() ? "" : csv_number(s.get<double>()));
    }
    csv << "\n";
    days.push_back(json{{"day", day}, {"costs", jc}, {"savings", js}});
  }
  json gc = json::object(), gs = json::object();
  csv << "total";
  for (const auto& p : policy_order) {
    gc[p] = grand[p];
    csv << ',' << csv_number(grand[p]);
  }
  for (const auto& p : policy_order) {
    const json s = savings_of(grand[p], grand);
    if (!s.is_null()) gs[p] = s;
    csv << ',' << (s.is_null() ? "" : csv_number(s.get<double>()));
  }
  csv << "\n";

  if (o.format == "json") {
    json doc{{"schema_version", kSchemaVersion},
             {"command", "report"},
             {"policies", policy_order},
             {"days", days},
             {"totals", json{{"costs", gc}, {"savings", gs}}}};
    emit(doc.dump(2) + "\n", o, out);
  } else {
    emit(csv.str(), o, out);
  }
  return kOk;
}

// ---------------------------------------------------------------- wiring

void add_solver_flags(CLI::App* app, Options& o) {
  app->add_option("--alpha", o.alpha, "In-out weight on the core point, in [0, 1)")->capture_default_str();
  app->add_option("--epsilon", o.epsilon, "Relative Benders gap tolerance")->capture_default_str();
  app->add_option("--max-iter", o.max_iter, "Benders iteration limit")->capture_default_str();
  app->add_option("--workers", o.workers, "Parallel scenario subproblem workers")->capture_default_str();
  app->add_flag("--extensive", o.extensive, "Solve SLAD as one extensive-form LP instead of by Benders");
}

void add_output_flags(CLI::App* app, Options& o) {
  app->add_option("--out", o.out_path, "Output file (default: standard output)");
  app->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
}

void add_forecast_flags(CLI::App* app, Options& o) {
  app->add_option("--scenarios", o.scenarios_path, "Scenario file covering the day")->check(CLI::ExistingFile);
  app->add_option("--history", o.history_path, "History file for KNN scenarios")->check(CLI::ExistingFile);
  app->add_option("--source", o.source, "Scenario source for LAD/SLAD")
      ->check(CLI::IsMember({"file", "knn", "mean"}))
      ->capture_default_str();
  app->add_option("--knn-k", o.knn_k, "Nearest days kept as scenarios")->capture_default_str();
  app->add_option("--knn-window", o.knn_window, "Trailing periods matched by KNN (0: whole prefix)")
      ->capture_default_str();
  app->add_option("--sample", o.sample, "Scenarios drawn per step (0: all)")->capture_default_str();
  app->add_option("--seed", o.seed, "Seed for scenario sampling")->capture_default_str();
  app->add_option("--horizon", o.horizon, "Look-ahead periods")->check(CLI::PositiveNumber)->capture_default_str();
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Economic dispatch engine: SCED, look-ahead and stochastic look-ahead dispatch with rolling-horizon "
               "day simulation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "slad 0.1.0");

  auto* solve = app.add_subcommand("solve", "Solve one dispatch problem and print the binding period");
  solve->add_option("--case", o.case_path, "Case document")->required()->check(CLI::ExistingFile);
  solve->add_option("--policy", o.policy, "sced | lad | slad | plad | pd")->capture_default_str();
  solve->add_option("--demand", o.demand, "Per-bus MW list, or tN for period N of --day / --scenarios");
  solve->add_option("--day", o.day_path, "Realized day file")->check(CLI::ExistingFile);
  solve->add_option("--period", o.period, "Period (from 1) being cleared")->capture_default_str();
  add_forecast_flags(solve, o);
  add_solver_flags(solve, o);
  add_output_flags(solve, o);
  solve->add_flag("--timings", o.timings, "Include wall-clock times (makes output non-reproducible)");

  auto* simulate = app.add_subcommand(
      "simulate",
      "Replay a day under one policy. CSV columns: period, policy, demand, pg:<gen>..., surplus, shortage, "
      "reg_shortage, rspin_shortage, op_shortage, energy, import, no_load, reserves, penalty_balance, "
      "penalty_reserves, penalty_flow, total, available_capacity, capacity_slow, capacity_fast, solve_objective, "
      "scenarios, benders_iterations; a final 'total' row carries the day totals");
  simulate->add_option("--case", o.case_path, "Case document")->required()->check(CLI::ExistingFile);
  simulate->add_option("--day", o.day_path, "Realized day file")->required()->check(CLI::ExistingFile);
  simulate->add_option("--policy", o.policy, "sced | lad | slad | plad | pd")->capture_default_str();
  add_forecast_flags(simulate, o);
  add_solver_flags(simulate, o);
  add_output_flags(simulate, o);
  simulate->add_flag("--timings", o.timings, "Include wall-clock times (makes output non-reproducible)");

  auto* compare = app.add_subcommand("compare", "Replay a day under several policies and report savings over SCED");
  compare->add_option("--case", o.case_path, "Case document")->required()->check(CLI::ExistingFile);
  compare->add_option("--day", o.day_path, "Realized day file")->required()->check(CLI::ExistingFile);
  compare->add_option("--policies", o.policies, "Comma-separated policies")->capture_default_str();
  add_forecast_flags(compare, o);
  add_solver_flags(compare, o);
  add_output_flags(compare, o);

  auto* report = app.add_subcommand("report", "Aggregate simulation logs into per-day cost and savings tables");
  report->add_option("--logs", o.logs, "Simulation logs (JSON)")->required()->check(CLI::ExistingFile);
  add_output_flags(report, o);

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kOk : kUsageError;
  }

  try {
    if (*solve) return cmd_solve(o, out);
    if (*simulate) return cmd_simulate(o, out);
    if (*compare) return cmd_compare(o, out);
    if (*report) return cmd_report(o, out);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsageError;
}

}  // namespace slad::cli
