// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "fixtures.hpp"
#include "slad/simulator.hpp"

using namespace slad;
using namespace slad::fixtures;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Checker {
 public:
  void require(bool ok, const std::string& what) {
    if (!ok && failures_++ < 5) detail_ << (detail_.tellp() > 0 ? "; " : "") << what;
  }
  void note(const std::string& what) { notes_ << (notes_.tellp() > 0 ? "; " : "") << what; }
  Outcome outcome() const {
    Outcome o;
    o.pass = failures_ == 0;
    o.detail = o.pass ? notes_.str() : std::to_string(failures_) + " failure(s): " + detail_.str();
    return o;
  }

 private:
  int failures_ = 0;
  std::ostringstream detail_;
  std::ostringstream notes_;
};

std::string fmt(double v, int precision = 6) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SimulationLog simulate(const ValidatedCase& vc, const ScenarioSet& day, PolicyKind kind, std::size_t horizon,
                       const Forecaster& f, ScenarioSource source = ScenarioSource::kFile, std::size_t knn_k = 10) {
  PolicySpec p;
  p.kind = kind;
  p.horizon = horizon;
  p.source = source;
  p.knn_k = knn_k;
  return run_simulation(vc, day, p, f, 7);
}

// -- 1 -----------------------------------------------------------------------
Outcome toy_table() {
  Checker c;
  const auto t0 = std::chrono::steady_clock::now();
  const ValidatedCase vc = toy_case();
  const ScenarioSet day = toy_day();
  const ScenarioSet sc = toy_scenarios();
  const Forecaster f{&sc, nullptr};
  struct Row {
    PolicyKind kind;
    double g1[2], g2[2], shortage[2], cost[2];
  };
  const Row rows[] = {
      {PolicyKind::kSced, {10, 20}, {0, 10}, {0, 5}, {100, 5400}},
      {PolicyKind::kLad, {7, 20}, {3, 13}, {0, 2}, {130, 2460}},
      {PolicyKind::kSlad, {3, 20}, {7, 15}, {0, 0}, {170, 500}},
  };
  for (const Row& r : rows) {
    const SimulationLog log = simulate(vc, day, r.kind, 2, f);
    const std::string name(to_string(r.kind));
    c.require(log.steps.size() == 2, name + ": wrong step count");
    for (std::size_t t = 0; t < 2 && t < log.steps.size(); ++t) {
      const auto& s = log.steps[t];
      const std::string at = name + " t" + std::to_string(t + 1);
      c.require(std::abs(s.binding[0].pg - r.g1[t]) <= 1e-6, at + " G1=" + fmt(s.binding[0].pg));
      c.require(std::abs(s.binding[1].pg - r.g2[t]) <= 1e-6, at + " G2=" + fmt(s.binding[1].pg));
      c.require(std::abs(s.slacks.shortage - r.shortage[t]) <= 1e-6, at + " shortage=" + fmt(s.slacks.shortage));
      c.require(std::abs(s.cost.total - r.cost[t]) <= 1e-6, at + " cost=" + fmt(s.cost.total));
    }
  }
  const double secs = seconds_since(t0);
  c.require(secs < 1.0, "runtime " + fmt(secs) + " s");
  c.note("all 18 cells match, " + fmt(secs, 3) + " s");
  return c.outcome();
}

// -- 2 -----------------------------------------------------------------------
Outcome benders_extensive() {
  Checker c;
  const auto t0 = std::chrono::steady_clock::now();
  {
    const ValidatedCase vc = toy_case();
    const ScenarioSet sc = toy_scenarios();
    const SystemState st = SystemState::initial(vc);
    const BendersResult r = run_benders(vc, st, sc);
    const double ext = extensive_objective(vc, st, sc);
    c.require(close_rel(r.objective, ext, 1e-5), "toy " + fmt(r.objective, 10) + " vs " + fmt(ext, 10));
  }
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const ValidatedCase vc = make_case3({.seed = seed});
    const ScenarioSet sc = case3_scenarios(vc, 6, 5, seed);
    const SystemState st = SystemState::initial(vc);
    const BendersResult r = run_benders(vc, st, sc);
    const double ext = extensive_objective(vc, st, sc);
    c.require(r.state.status == BendersStatus::kOptimal, "case3 seed " + std::to_string(seed) + " hit the limit");
    c.require(close_rel(r.objective, ext, 1e-5),
              "case3 seed " + std::to_string(seed) + ": " + fmt(r.objective, 10) + " vs " + fmt(ext, 10));
  }
  const double secs = seconds_since(t0);
  c.require(secs < 30.0, "runtime " + fmt(secs) + " s");
  c.note("toy + 5 case3 instances, " + fmt(secs, 3) + " s");
  return c.outcome();
}

// -- 3 -----------------------------------------------------------------------
Outcome algorithm_invariants() {
  Checker c;
  std::size_t optimal = 0;
  for (std::uint64_t v = 1; v <= 50; ++v) {
    const ValidatedCase vc = make_case3({.seed = 100 + v, .congested = v % 3 == 0, .perturb = true});
    const ScenarioSet sc = case3_scenarios(vc, 6, 5, 200 + v, v % 2 == 0);
    const SystemState st = SystemState::initial(vc);
    const BendersResult r = run_benders(vc, st, sc);
    const auto& h = r.state.history;
    const std::string tag = "variant " + std::to_string(v);
    for (std::size_t k = 0; k < h.size(); ++k) {
      // LP feasibility tolerance times the penalty prices bounds the noise.
      const double tol = 1e-7 * std::max(1.0, std::abs(h[k].ub));
      if (std::isfinite(h[k].ub)) c.require(h[k].lb <= h[k].ub + tol, tag + ": LB > UB");
      if (k == 0) continue;
      c.require(h[k].lb >= h[k - 1].lb - tol, tag + ": LB decreased");
      c.require(h[k].ub <= h[k - 1].ub + tol, tag + ": UB increased");
    }
    if (r.state.status == BendersStatus::kOptimal) {
      ++optimal;
      const double ext = extensive_objective(vc, st, sc);
      c.require(close_rel(r.objective, ext, 1e-5), tag + ": " + fmt(r.objective, 10) + " vs " + fmt(ext, 10));
    }
  }
  c.note(std::to_string(optimal) + "/50 declared optimal and confirmed");
  return c.outcome();
}

// -- 4 -----------------------------------------------------------------------
double solve_objective(const DispatchModel& m) {
  const LpSolution sol = solve_lp(m.lp);
  if (sol.status != LpStatus::kOptimal) throw std::runtime_error("model not optimal");
  return sol.objective;
}

ValidatedCase with_loose_ramps(const ValidatedCase& vc) {
  SystemCase data = vc.data();
  for (auto& g : data.generators) g.ramp_up = g.ramp_down = 1e4;
  return validate_case(std::move(data));
}

void reduction_identities_on(Checker& c, const std::string& name, const ValidatedCase& vc, const ScenarioSet& multi) {
  const SystemState st = SystemState::initial(vc);
  ScenarioSet single = mean_forecast(multi);
  const double lad = solve_objective(build_lad(vc, st, single, single.horizon));
  const double slad = solve_objective(build_slad_extensive(vc, st, single));
  const double slad_b = run_benders(vc, st, single).objective;
  c.require(close_rel(slad, lad, 1e-8), name + ": SLAD(S=1) " + fmt(slad, 12) + " vs LAD " + fmt(lad, 12));
  c.require(close_rel(slad_b, lad, 1e-5), name + ": Benders(S=1) " + fmt(slad_b, 12) + " vs LAD " + fmt(lad, 12));

  const ScenarioSet first = single.slice(0, 1);
  const double lad1 = solve_objective(build_lad(vc, st, first, 1));
  const double sced = solve_objective(build_sced(vc, st, first.scenarios.front()));
  c.require(close_rel(lad1, sced, 1e-8), name + ": LAD(T=1) " + fmt(lad1, 12) + " vs SCED " + fmt(sced, 12));

  const ValidatedCase loose = with_loose_ramps(vc);
  const SystemState lst = SystemState::initial(loose);
  const DispatchModel m = build_lad(loose, lst, single, single.horizon);
  const LpSolution sol = solve_lp(m.lp);
  DispatchSolution d = extract_dispatch(sol, m.vmap);
  for (std::size_t t = 1; t < d.period_weight.size(); ++t) d.period_weight[t] = 0.0;
  const double slice = itemize_costs(d, loose).total;
  double sum = 0.0;
  double sced0 = 0.0;
  for (std::size_t t = 0; t < single.horizon; ++t) {
    SystemState at = lst;
    at.wall_clock = t;
    const double v = solve_objective(build_sced(loose, at, single.slice(t, 1).scenarios.front()));
    if (t == 0) sced0 = v;
    sum += v;
  }
  c.require(close_rel(slice, sced0, 1e-8), name + ": period-1 slice " + fmt(slice, 12) + " vs SCED " + fmt(sced0, 12));
  c.require(close_rel(sol.objective, sum, 1e-8), name + ": LAD " + fmt(sol.objective, 12) + " vs sum of SCEDs " + fmt(sum, 12));
}

Outcome reduction_identities() {
  Checker c;
  reduction_identities_on(c, "toy", toy_case(), toy_scenarios());
  const ValidatedCase vc = make_case3({.seed = 3});
  reduction_identities_on(c, "case3", vc, case3_scenarios(vc, 6, 5, 3));
  c.note("toy and case3");
  return c.outcome();
}

// -- 5 -----------------------------------------------------------------------
Outcome lazy_flows() {
  Checker c;
  std::size_t binding = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const ValidatedCase vc = make_case3({.seed = seed, .congested = true});
    const ScenarioSet sc = case3_scenarios(vc, 6, 5, 40 + seed);
    const SystemState st = SystemState::initial(vc);
    const DispatchModel full = build_slad_extensive(vc, st, sc);
    const LpSolution fs = solve_lp(full.lp);
    DispatchModel lazy = build_slad_extensive(vc, st, sc, {FlowMode::kLazy});
    const LpSolution ls = solve_with_lazy_flows(lazy, vc, 1e-9);
    c.require(close_rel(fs.objective, ls.objective, 1e-8),
              "seed " + std::to_string(seed) + ": full " + fmt(fs.objective, 12) + " vs lazy " + fmt(ls.objective, 12));
    const DispatchSolution d = extract_dispatch(fs, full.vmap);
    bool congested = false;
    for (std::size_t i = 0; i < d.flow.size(); ++i) {
      const std::size_t e = i % d.num_branches;
      if (!vc->branches[e].monitored) continue;
      congested = congested || std::abs(d.flow[i]) >= vc->branches[e].limit_hi - 1e-6;
    }
    binding += congested;

    BendersConfig cfg;
    cfg.lazy_flows = true;
    const double with_lazy = run_benders(vc, st, sc, cfg).objective;
    cfg.lazy_flows = false;
    const double without = run_benders(vc, st, sc, cfg).objective;
    c.require(close_rel(with_lazy, without, 1e-5), "seed " + std::to_string(seed) + ": Benders lazy " +
                                                       fmt(with_lazy, 12) + " vs full " + fmt(without, 12));
  }
  c.require(binding == 5, "only " + std::to_string(binding) + "/5 instances congested");
  c.note("5 congested case3 instances");
  return c.outcome();
}

// -- 6, 7 --------------------------------------------------------------------
struct Fixture {
  std::string name;
  ValidatedCase vc;
  ScenarioSet sc;
};

std::vector<Fixture> cut_fixtures() {
  std::vector<Fixture> out;
  out.push_back({"toy", toy_case(), toy_scenarios()});
  ValidatedCase vc = make_case3({.seed = 11});
  ScenarioSet sc = case3_scenarios(vc, 6, 5, 11);
  out.push_back({"case3", std::move(vc), std::move(sc)});
  ValidatedCase cg = make_case3({.seed = 12, .congested = true});
  ScenarioSet cs = case3_scenarios(cg, 6, 5, 12);
  out.push_back({"case3-congested", std::move(cg), std::move(cs)});
  return out;
}

Outcome cut_validity() {
  Checker c;
  double worst = kInfinity;
  std::size_t cuts = 0;
  for (const Fixture& fx : cut_fixtures()) {
    const SystemState st = SystemState::initial(fx.vc);
    const Scenario current = fx.sc.slice(0, 1).scenarios.front();
    const auto points = random_first_stage_points(fx.vc, st, current, 100, 99);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto& xa = points[i];
      const auto& xb = points[(i + 37) % points.size()];
      for (std::size_t s = 0; s < fx.sc.size(); ++s) {
        const DispatchModel sub = build_benders_subproblem(fx.vc, st, fx.sc, s, xa);
        const Cut cut = separate_benders_cut(solve_lp(sub.lp), sub, s);
        ++cuts;
        for (const auto* x : {&xa, &xb}) {
          const double q = recourse_oracle(fx.vc, st, fx.sc, s, *x);
          const double margin = q - cut.evaluate(*x);
          worst = std::min(worst, margin);
          c.require(margin >= -1e-6, fx.name + " point " + std::to_string(i) + " s" + std::to_string(s) +
                                         ": cut exceeds Q by " + fmt(-margin));
        }
      }
    }
  }
  c.note(std::to_string(cuts) + " cuts, worst margin " + fmt(worst));
  return c.outcome();
}

Outcome recourse_feasibility() {
  Checker c;
  std::size_t solves = 0;
  for (const Fixture& fx : cut_fixtures()) {
    const SystemState st = SystemState::initial(fx.vc);
    const Scenario current = fx.sc.slice(0, 1).scenarios.front();
    for (const auto& x : random_first_stage_points(fx.vc, st, current, 100, 7)) {
      for (std::size_t s = 0; s < fx.sc.size(); ++s) {
        const DispatchModel sub = build_benders_subproblem(fx.vc, st, fx.sc, s, x);
        const LpSolution sol = solve_lp(sub.lp);
        ++solves;
        c.require(sol.status == LpStatus::kOptimal,
                  fx.name + " s" + std::to_string(s) + ": " + std::string(to_string(sol.status)));
      }
    }
  }
  c.note(std::to_string(solves) + " subproblems optimal");
  return c.outcome();
}

// -- 8 -----------------------------------------------------------------------
Outcome savings_metric() {
  Checker c;
  std::ostringstream out, err;
  const int rc = cli::run_command({"compare", "--case", fixture_path("toy.json"), "--day", fixture_path("toy_day.csv"),
                                   "--scenarios", fixture_path("toy_slad.csv"), "--horizon", "2", "--policies",
                                   "sced,lad,slad,pd", "--format", "csv"},
                                  out, err);
  c.require(rc == 0, "compare exited " + std::to_string(rc) + ": " + err.str());
  std::istringstream lines(out.str());
  std::string line;
  double slad = std::nan(""), sced = std::nan("");
  while (std::getline(lines, line)) {
    const auto comma = line.rfind(',');
    if (line.rfind("SLAD,", 0) == 0) slad = std::stod(line.substr(comma + 1));
    if (line.rfind("SCED,", 0) == 0) sced = std::stod(line.substr(comma + 1));
  }
  const double expected = (5500.0 - 670.0) / 5500.0;
  c.require(std::abs(slad - expected) <= 1e-4, "SLAD savings " + fmt(slad));
  c.require(sced == 0.0, "SCED savings " + fmt(sced));
  c.note("SLAD savings " + fmt(100 * slad, 6) + "%");
  return c.outcome();
}

// -- 9 -----------------------------------------------------------------------
Outcome pd_dominance() {
  Checker c;
  {
    const ValidatedCase vc = toy_case();
    const ScenarioSet day = toy_day();
    const ScenarioSet sc = toy_scenarios();
    const Forecaster f{&sc, nullptr};
    const double pd = run_perfect_dispatch(vc, day).totals.total;
    c.require(std::abs(pd - toy_perfect_dispatch_cost()) <= 1e-6, "toy PD " + fmt(pd) + " differs from brute force");
    for (PolicyKind k : {PolicyKind::kSced, PolicyKind::kLad, PolicyKind::kSlad, PolicyKind::kPlad}) {
      const double x = simulate(vc, day, k, 2, f).totals.total;
      c.require(pd <= x * (1 + 1e-6) + 1e-9, "toy PD " + fmt(pd) + " > " + std::string(to_string(k)) + " " + fmt(x));
    }
  }
  constexpr std::size_t kDay = 12;
  for (std::uint64_t d = 1; d <= 20; ++d) {
    const ValidatedCase vc = make_case3({.seed = 500 + d, .perturb = true});
    const ScenarioSet day = case3_day(vc, kDay, 600 + d);
    const HistoryStore hist = case3_history(vc, kDay, 30, 700 + d);
    const Forecaster f{nullptr, &hist};
    const double pd = run_perfect_dispatch(vc, day).totals.total;
    for (PolicyKind k : {PolicyKind::kSced, PolicyKind::kLad, PolicyKind::kSlad, PolicyKind::kPlad}) {
      const double x = simulate(vc, day, k, 4, f, ScenarioSource::kKnn, 5).totals.total;
      c.require(pd <= x + 1e-6 * std::abs(x), "day " + std::to_string(d) + ": PD " + fmt(pd, 10) + " > " +
                                                  std::string(to_string(k)) + " " + fmt(x, 10));
    }
  }
  c.note("toy + 20 case3 days with KNN forecasts");
  return c.outcome();
}

// -- 10 ----------------------------------------------------------------------
Outcome in_out() {
  Checker c;
  std::ostringstream iters;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const ValidatedCase vc = make_case3({.seed = 30 + seed, .congested = seed == 2});
    const ScenarioSet sc = case3_scenarios(vc, 6, 5, 30 + seed);
    const SystemState st = SystemState::initial(vc);
    std::vector<double> objs;
    iters << (seed > 1 ? " | " : "") << "seed " << seed << ":";
    for (double alpha : {0.0, 0.25, 0.5, 0.9}) {
      BendersConfig cfg;
      cfg.alpha = alpha;
      const BendersResult r = run_benders(vc, st, sc, cfg);
      c.require(r.state.status == BendersStatus::kOptimal, "alpha " + fmt(alpha) + " hit the limit");
      objs.push_back(r.objective);
      iters << " a=" << alpha << "->" << r.state.iteration;
    }
    for (double o : objs)
      c.require(close_rel(o, objs.front(), 1e-5), "seed " + std::to_string(seed) + ": " + fmt(o, 10) + " vs " +
                                                      fmt(objs.front(), 10));
  }
  c.note("iterations " + iters.str());
  return c.outcome();
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"toy day table", toy_table},
      {"Benders matches extensive form", benders_extensive},
      {"bound monotonicity", algorithm_invariants},
      {"reduction identities", reduction_identities},
      {"lazy flowgate equivalence", lazy_flows},
      {"cut validity", cut_validity},
      {"recourse feasibility", recourse_feasibility},
      {"savings metric", savings_metric},
      {"perfect dispatch dominance", pd_dominance},
      {"in-out convergence", in_out},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    failed += !o.pass;
    std::cout << "criterion " << (i + 1) << " [" << criteria[i].first << "]: " << (o.pass ? "PASS" : "FAIL") << " - "
              << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
