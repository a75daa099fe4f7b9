#include "fixtures.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "slad/case_io.hpp"

#ifndef SLAD_FIXTURE_DIR
#error "SLAD_FIXTURE_DIR must point at tests/fixtures"
#endif

namespace slad::fixtures {

std::string fixture_path(const std::string& name) { return std::string(SLAD_FIXTURE_DIR) + "/" + name; }

ValidatedCase toy_case() { return validate_case(load_case_file(fixture_path("toy.json"))); }

ScenarioSet toy_day() { return load_timeseries_file(fixture_path("toy_day.csv"), toy_case()); }

ScenarioSet toy_scenarios() { return load_timeseries_file(fixture_path("toy_slad.csv"), toy_case()); }

namespace {

Generator thermal(std::string id, std::string bus, double pmin, double pmax, double init, double ramp,
                  std::vector<BidSegment> segs) {
  Generator g;
  g.id = std::move(id);
  g.bus = std::move(bus);
  g.pmin = pmin;
  g.pmax = pmax;
  g.initial_output = init;
  g.ramp_up = ramp;
  g.ramp_down = ramp;
  g.segments = std::move(segs);
  return g;
}

void no_reserves(Generator& g) {
  g.flags.regulation = false;
  g.flags.ra_reg = false;
  g.flags.ra_spin = false;
  g.flags.ra_s_on = false;
  g.flags.ra_s_off = false;
}

constexpr double kShareB1 = 0.30;
constexpr double kShareB2 = 0.45;

std::vector<double> split_load(double total, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> wiggle(-0.03, 0.03);
  const double b1 = total * (kShareB1 + wiggle(rng));
  const double b2 = total * (kShareB2 + wiggle(rng));
  return {b1, b2, std::max(0.0, total - b1 - b2)};
}

// Daily load shape plus a scenario-specific random walk.
Scenario draw_trajectory(std::size_t periods, std::mt19937_64& rng, double level_shift, const Scenario* head) {
  std::normal_distribution<double> step(0.0, 7.0);
  std::normal_distribution<double> wind_step(0.0, 9.0);
  Scenario sc;
  sc.load.resize(periods);
  std::vector<double> wind(periods);
  double drift = 0.0;
  double w = 35.0;
  for (std::size_t t = 0; t < periods; ++t) {
    const double shape = 170.0 + 35.0 * std::sin(std::numbers::pi * static_cast<double>(t) / std::max<double>(periods, 2));
    drift += step(rng);
    w = std::clamp(w + wind_step(rng), 0.0, 70.0);
    sc.load[t] = split_load(std::max(40.0, shape + level_shift + drift), rng);
    wind[t] = w;
  }
  if (head) {
    sc.load[0] = head->load[0];
    wind[0] = head->pmax_override.at(2)[0];
  }
  sc.pmax_override[2] = std::move(wind);
  return sc;
}

}  // namespace

ValidatedCase make_case3(const Case3Options& options) {
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> jitter(0.8, 1.2);
  std::uniform_real_distribution<double> wide(0.5, 1.5);
  auto j = [&](double v) { return options.perturb ? v * jitter(rng) : v; };
  auto w = [&](double v) { return options.perturb ? v * wide(rng) : v; };

  SystemCase c;
  c.buses = {{"B1"}, {"B2"}, {"B3"}};
  c.step_minutes = 5.0;
  c.cost_basis = CostBasis::kPerHour;

  Generator coal = thermal("COAL", "B1", 30, 150, j(80), w(0.6) * options.ramp_scale, {{60, j(18)}, {60, j(26)}});
  coal.segments[1].price = std::max(coal.segments[1].price, coal.segments[0].price + 1.0);
  coal.no_load_cost = j(120);
  coal.reserve_caps = {10, 20, 20, 0};
  coal.reserve_prices = {j(8), j(4), j(2), 0};

  Generator gas = thermal("GAS", "B2", 10, 90, j(40), w(1.5) * options.ramp_scale, {{40, j(35)}, {40, j(48)}});
  gas.segments[1].price = std::max(gas.segments[1].price, gas.segments[0].price + 1.0);
  gas.no_load_cost = j(60);
  gas.reserve_caps = {15, 30, 30, 0};
  gas.reserve_prices = {j(6), j(3), j(1.5), 0};

  // Renewable output must be able to follow any scenario, hence the ramp.
  Generator wind = thermal("WIND", "B3", 0, 70, 30, 70, {{70, 0.0}});
  no_reserves(wind);

  Generator imp = thermal("IMP", "B3", 0, 50, j(10), 2, {{50, j(75)}});
  imp.is_import = true;
  no_reserves(imp);

  c.generators = {coal, gas, wind, imp};

  const double limit = options.congested ? 15.0 : 60.0;
  Branch l13{"L13", {{"B1", 2.0 / 3.0}, {"B2", 1.0 / 3.0}}, -limit, limit, 1500.0, true};
  Branch l23{"L23", {{"B1", 1.0 / 3.0}, {"B2", 2.0 / 3.0}}, -limit, limit, 1500.0, true};
  Branch l12{"L12", {{"B1", 1.0 / 3.0}, {"B2", -1.0 / 3.0}}, -kInfinity, kInfinity, 1500.0, false};
  c.branches = {l13, l23, l12};

  c.reserve_req.reg = w(6.0);
  c.reserve_req.rspin = w(15.0);
  c.reserve_req.op = w(25.0);
  c.penalties = {5000.0, 5000.0, 3000.0, 2500.0, 2000.0};
  return validate_case(std::move(c));
}

ScenarioSet case3_scenarios(const ValidatedCase& vcase, std::size_t periods, std::size_t count, std::uint64_t seed,
                            bool random_weights) {
  (void)vcase;
  std::mt19937_64 rng(seed);
  ScenarioSet set;
  set.horizon = periods;
  std::uniform_real_distribution<double> weight(0.5, 1.5);
  double total = 0.0;
  for (std::size_t s = 0; s < count; ++s) {
    Scenario sc = draw_trajectory(periods, rng, 0.0, s == 0 ? nullptr : &set.scenarios.front());
    sc.name = "s" + std::to_string(s + 1);
    sc.prob = random_weights ? weight(rng) : 1.0;
    total += sc.prob;
    set.scenarios.push_back(std::move(sc));
  }
  for (auto& sc : set.scenarios) sc.prob /= total;
  return set;
}

ScenarioSet case3_day(const ValidatedCase& vcase, std::size_t periods, std::uint64_t seed) {
  (void)vcase;
  std::mt19937_64 rng(seed ^ 0xD1CEULL);
  std::normal_distribution<double> shift(0.0, 15.0);
  ScenarioSet set;
  set.horizon = periods;
  Scenario sc = draw_trajectory(periods, rng, shift(rng), nullptr);
  sc.name = "actual";
  set.scenarios.push_back(std::move(sc));
  return set;
}

HistoryStore case3_history(const ValidatedCase& vcase, std::size_t periods, std::size_t days, std::uint64_t seed) {
  (void)vcase;
  std::mt19937_64 rng(seed ^ 0x415ULL);
  std::normal_distribution<double> shift(0.0, 15.0);
  std::vector<Scenario> out;
  for (std::size_t d = 0; d < days; ++d) {
    Scenario sc = draw_trajectory(periods, rng, shift(rng), nullptr);
    sc.name = "day" + std::to_string(d + 1);
    out.push_back(std::move(sc));
  }
  return HistoryStore::from_days(std::move(out));
}

double vertex_enumeration_minimum(const LinearProgram& lp) {
  const int n = lp.num_variables();
  struct Plane {
    Eigen::VectorXd a;
    double b;
  };
  std::vector<Plane> planes;
  for (int i = 0; i < lp.num_rows(); ++i) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
    const LinearRow& r = lp.row(i);
    for (std::size_t k = 0; k < r.index.size(); ++k) a(r.index[k]) += r.value[k];
    planes.push_back({a, r.rhs});
  }
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
    a(j) = 1.0;
    if (std::isfinite(lp.lower(j))) planes.push_back({a, lp.lower(j)});
    if (std::isfinite(lp.upper(j))) planes.push_back({a, lp.upper(j)});
  }

  auto feasible = [&](const Eigen::VectorXd& x) {
    constexpr double tol = 1e-7;
    for (int j = 0; j < n; ++j)
      if (x(j) < lp.lower(j) - tol || x(j) > lp.upper(j) + tol) return false;
    for (int i = 0; i < lp.num_rows(); ++i) {
      const LinearRow& r = lp.row(i);
      double lhs = 0.0;
      for (std::size_t k = 0; k < r.index.size(); ++k) lhs += r.value[k] * x(r.index[k]);
      const double scale = tol * std::max(1.0, std::abs(r.rhs));
      if (r.sense == RowSense::kLessEqual && lhs > r.rhs + scale) return false;
      if (r.sense == RowSense::kGreaterEqual && lhs < r.rhs - scale) return false;
      if (r.sense == RowSense::kEqual && std::abs(lhs - r.rhs) > scale) return false;
    }
    return true;
  };

  double best = kInfinity;
  const int m = static_cast<int>(planes.size());
  std::vector<int> pick(n);
  // Lexicographic n-subsets of the planes.
  for (int i = 0; i < n; ++i) pick[i] = i;
  if (n > m) return best;
  while (true) {
    Eigen::MatrixXd A(n, n);
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) {
      A.row(i) = planes[pick[i]].a.transpose();
      b(i) = planes[pick[i]].b;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (lu.rank() == n) {
      const Eigen::VectorXd x = lu.solve(b);
      if (feasible(x)) {
        double obj = lp.objective_constant;
        for (int j = 0; j < n; ++j) obj += lp.cost(j) * x(j);
        best = std::min(best, obj);
      }
    }
    int k = n - 1;
    while (k >= 0 && pick[k] == m - n + k) --k;
    if (k < 0) break;
    ++pick[k];
    for (int i = k + 1; i < n; ++i) pick[i] = pick[i - 1] + 1;
  }
  return best;
}

std::vector<std::vector<double>> random_first_stage_points(const ValidatedCase& vcase, const SystemState& state,
                                                           const Scenario& current, std::size_t count,
                                                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> price(-60.0, 60.0);
  DispatchModel master = build_benders_master(vcase, state, current, {}, {}, 0.0);
  const std::vector<double> base = master.lp.costs();
  std::vector<std::vector<double>> vertices;
  std::vector<std::vector<double>> out;
  while (out.size() < count) {
    for (int col : master.vmap.first_stage_columns) master.lp.set_cost(col, base[col] + price(rng));
    const LpSolution sol = solve_lp(master.lp);
    if (sol.status != LpStatus::kOptimal) continue;
    std::vector<double> x = first_stage_vector(sol, master.vmap);
    if (!vertices.empty() && out.size() + 1 < count) {
      std::vector<double> mid(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) mid[i] = 0.5 * (x[i] + vertices.back()[i]);
      out.push_back(std::move(mid));
    }
    vertices.push_back(x);
    out.push_back(std::move(x));
  }
  out.resize(count);
  return out;
}

namespace {

void fix_first_stage(DispatchModel& m, const std::vector<double>& x1) {
  static constexpr VarKind kinds[kFirstStagePerGenerator] = {VarKind::kPg, VarKind::kReg, VarKind::kSpin,
                                                             VarKind::kSuppOn, VarKind::kSuppOff};
  for (std::size_t g = 0; g < m.vmap.num_generators; ++g)
    for (std::size_t p = 0; p < kFirstStagePerGenerator; ++p) {
      const auto col = m.vmap.column(kinds[p], static_cast<int>(g), 0, 0);
      if (!col) throw std::logic_error("first-stage column missing");
      const double v = x1[g * kFirstStagePerGenerator + p];
      m.lp.set_bounds(*col, v, v);
    }
}

}  // namespace

double recourse_oracle(const ValidatedCase& vcase, const SystemState& state, const ScenarioSet& scenarios,
                       std::size_t s, const std::vector<double>& x1) {
  ScenarioSet one;
  one.horizon = scenarios.horizon;
  one.scenarios = {scenarios.scenarios.at(s)};
  one.scenarios.front().prob = 1.0;
  DispatchModel lad = build_lad(vcase, state, one, one.horizon);
  fix_first_stage(lad, x1);
  const LpSolution full = solve_lp(lad.lp);
  if (full.status != LpStatus::kOptimal) throw std::runtime_error("oracle look-ahead not optimal");

  DispatchModel sced = build_sced(vcase, state, one.slice(0, 1).scenarios.front());
  fix_first_stage(sced, x1);
  const LpSolution head = solve_lp(sced.lp);
  if (head.status != LpStatus::kOptimal) throw std::runtime_error("oracle first period not optimal");
  return full.objective - head.objective;
}

double extensive_objective(const ValidatedCase& vcase, const SystemState& state, const ScenarioSet& scenarios) {
  const DispatchModel m = build_slad_extensive(vcase, state, scenarios);
  const LpSolution sol = solve_lp(m.lp);
  if (sol.status != LpStatus::kOptimal) throw std::runtime_error("extensive form not optimal");
  return sol.objective;
}

double toy_perfect_dispatch_cost() {
  // G1: 20 MW at $10, 20 MW/period ramp. G2: 30 MW at $20, 10 MW/period.
  // Imbalance costs $1000/MW; both start at 0; demand 10 then 35.
  constexpr double step = 0.25;
  double best = kInfinity;
  for (double a = 0.0; a <= 20.0 + 1e-9; a += step) {
    for (double b = 0.0; b <= 10.0 + 1e-9; b += step) {
      const double cost1 = 10 * a + 20 * b + 1000 * std::abs(a + b - 10.0);
      const double cap1 = std::min(20.0, a + 20.0);
      const double cap2 = std::min(30.0, b + 10.0);
      const double g1 = std::min(cap1, 35.0);
      const double g2 = std::min(cap2, 35.0 - g1);
      const double cost2 = 10 * g1 + 20 * g2 + 1000 * (35.0 - g1 - g2);
      best = std::min(best, cost1 + cost2);
    }
  }
  return best;
}

bool close_rel(double a, double b, double rel, double abs_floor) {
  return std::abs(a - b) <= rel * std::max({abs_floor, std::abs(a), std::abs(b)});
}

}  // namespace slad::fixtures
