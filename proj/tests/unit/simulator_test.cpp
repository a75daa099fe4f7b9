#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "slad/simulator.hpp"

using namespace slad;

namespace {

SimulationLog toy_run(PolicyKind kind) {
  static const ValidatedCase vc = fixtures::toy_case();
  static const ScenarioSet day = fixtures::toy_day();
  static const ScenarioSet sc = fixtures::toy_scenarios();
  PolicySpec p;
  p.kind = kind;
  p.horizon = 2;
  return run_simulation(vc, day, p, {&sc, nullptr}, 1);
}

}  // namespace

TEST(Simulator, ToyDayTotals) {
  EXPECT_NEAR(toy_run(PolicyKind::kSced).totals.total, 5500.0, 1e-6);
  EXPECT_NEAR(toy_run(PolicyKind::kLad).totals.total, 2590.0, 1e-6);
  EXPECT_NEAR(toy_run(PolicyKind::kSlad).totals.total, 670.0, 1e-6);
  EXPECT_NEAR(toy_run(PolicyKind::kPlad).totals.total, 650.0, 1e-6);
  EXPECT_NEAR(toy_run(PolicyKind::kPd).totals.total, fixtures::toy_perfect_dispatch_cost(), 1e-6);
}

TEST(Simulator, AvailableCapacityIsRampLimited) {
  const SimulationLog slad = toy_run(PolicyKind::kSlad);
  // Period 1: both units start at 0, so min(20, 0 + 20) + min(30, 0 + 10).
  EXPECT_NEAR(slad.steps[0].capacity.total, 30.0, 1e-9);
  // Period 2 after (3, 7): min(20, 23) + min(30, 17).
  EXPECT_NEAR(slad.steps[1].capacity.total, 37.0, 1e-9);
  const SimulationLog sced = toy_run(PolicyKind::kSced);
  EXPECT_NEAR(sced.steps[1].capacity.total, 30.0, 1e-9);
}

TEST(Simulator, BindingDecisionIsTheFirstPeriodOfEachSolve) {
  const ValidatedCase vc = fixtures::make_case3({.seed = 2});
  const ScenarioSet day = fixtures::case3_day(vc, 6, 2);
  PolicySpec p;
  p.kind = PolicyKind::kPlad;
  p.horizon = 3;
  const SimulationLog log = run_simulation(vc, day, p, {}, 0);
  SystemState st = SystemState::initial(vc);
  for (std::size_t t = 0; t < 6; ++t) {
    const std::size_t h = std::min<std::size_t>(3, 6 - t);
    const DispatchModel m = build_lad(vc, st, day.slice(t, h), h);
    const DispatchSolution d = extract_dispatch(solve_lp(m.lp), m.vmap);
    for (std::size_t g = 0; g < vc.num_generators(); ++g) {
      EXPECT_NEAR(log.steps[t].binding[g].pg, d.at(g, 0, 0).pg, 1e-7) << "t=" << t;
      st.prev_dispatch[g] = d.at(g, 0, 0).pg;
    }
    st.wall_clock = t + 1;
    EXPECT_NEAR(log.steps[t].solve_objective, d.objective, 1e-6 * std::abs(d.objective));
  }
}

TEST(Simulator, StepForecastPinsTheCurrentPeriod) {
  const ValidatedCase vc = fixtures::make_case3();
  const ScenarioSet day = fixtures::case3_day(vc, 8, 4);
  const ScenarioSet sc = fixtures::case3_scenarios(vc, 8, 5, 9);
  PolicySpec p;
  p.kind = PolicyKind::kSlad;
  const ScenarioSet view = step_scenarios(vc, day, p, {&sc, nullptr}, 3, 4, 0);
  ASSERT_EQ(view.size(), 5u);
  EXPECT_EQ(view.horizon, 4u);
  for (const auto& s : view.scenarios) {
    EXPECT_EQ(s.load[0], day.scenarios[0].load[3]);
    EXPECT_EQ(s.pmax_override.at(2)[0], day.scenarios[0].pmax_override.at(2)[3]);
  }
  EXPECT_EQ(view.scenarios[2].load[1], sc.scenarios[2].load[4]);
  p.kind = PolicyKind::kLad;
  EXPECT_EQ(step_scenarios(vc, day, p, {&sc, nullptr}, 3, 4, 0).size(), 1u);
}

TEST(Simulator, SamplingIsSeededAndRenormalized) {
  const ValidatedCase vc = fixtures::make_case3();
  const ScenarioSet day = fixtures::case3_day(vc, 6, 4);
  const ScenarioSet sc = fixtures::case3_scenarios(vc, 6, 5, 9, true);
  PolicySpec p;
  p.kind = PolicyKind::kSlad;
  p.sample = 3;
  const ScenarioSet a = step_scenarios(vc, day, p, {&sc, nullptr}, 1, 3, 42);
  const ScenarioSet b = step_scenarios(vc, day, p, {&sc, nullptr}, 1, 3, 42);
  ASSERT_EQ(a.size(), 3u);
  EXPECT_EQ(a, b);
  double total = 0.0;
  for (const auto& s : a.scenarios) total += s.prob;
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Simulator, IdenticalSeedsGiveIdenticalLogs) {
  const ValidatedCase vc = fixtures::make_case3({.seed = 6});
  const ScenarioSet day = fixtures::case3_day(vc, 8, 6);
  const HistoryStore hist = fixtures::case3_history(vc, 8, 12, 6);
  PolicySpec p;
  p.kind = PolicyKind::kSlad;
  p.horizon = 3;
  p.source = ScenarioSource::kKnn;
  p.knn_k = 4;
  p.sample = 3;
  const SimulationLog a = run_simulation(vc, day, p, {nullptr, &hist}, 11);
  const SimulationLog b = run_simulation(vc, day, p, {nullptr, &hist}, 11);
  ASSERT_EQ(a.steps.size(), b.steps.size());
  for (std::size_t t = 0; t < a.steps.size(); ++t) {
    EXPECT_EQ(a.steps[t].cost.total, b.steps[t].cost.total);
    EXPECT_EQ(a.steps[t].benders_iterations, b.steps[t].benders_iterations);
    for (std::size_t g = 0; g < vc.num_generators(); ++g) EXPECT_EQ(a.steps[t].binding[g].pg, b.steps[t].binding[g].pg);
  }
}

TEST(Simulator, PerfectDispatchDominatesRollingPolicies) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const ValidatedCase vc = fixtures::make_case3({.seed = seed, .perturb = true});
    const ScenarioSet day = fixtures::case3_day(vc, 10, seed);
    const HistoryStore hist = fixtures::case3_history(vc, 10, 20, seed);
    const double pd = run_perfect_dispatch(vc, day).totals.total;
    for (PolicyKind k : {PolicyKind::kSced, PolicyKind::kLad, PolicyKind::kSlad, PolicyKind::kPlad}) {
      PolicySpec p;
      p.kind = k;
      p.horizon = 4;
      p.source = ScenarioSource::kKnn;
      p.knn_k = 5;
      const double x = run_simulation(vc, day, p, {nullptr, &hist}, 0).totals.total;
      EXPECT_LE(pd, x * (1 + 1e-6)) << to_string(k) << " seed " << seed;
    }
  }
}

TEST(Simulator, ExtensiveAndBendersAgreeOnToy) {
  const ValidatedCase vc = fixtures::toy_case();
  const ScenarioSet day = fixtures::toy_day();
  const ScenarioSet sc = fixtures::toy_scenarios();
  PolicySpec p;
  p.kind = PolicyKind::kSlad;
  p.horizon = 2;
  p.use_benders = false;
  EXPECT_NEAR(run_simulation(vc, day, p, {&sc, nullptr}, 0).totals.total, 670.0, 1e-6);
}

TEST(Simulator, ReportsMissingInputs) {
  const ValidatedCase vc = fixtures::toy_case();
  const ScenarioSet day = fixtures::toy_day();
  PolicySpec p;
  p.kind = PolicyKind::kSlad;
  p.horizon = 2;
  EXPECT_THROW(run_simulation(vc, day, p, {}, 0), std::invalid_argument);
  p.source = ScenarioSource::kKnn;
  EXPECT_THROW(run_simulation(vc, day, p, {}, 0), std::invalid_argument);
  EXPECT_THROW(run_simulation(vc, fixtures::toy_scenarios(), p, {}, 0), std::invalid_argument);
}

TEST(Savings, FollowsTheRelativeCostFormula) {
  EXPECT_NEAR(daily_savings(670, 5500), 0.8781818, 1e-7);
  EXPECT_EQ(daily_savings(5500, 5500), 0.0);
  EXPECT_THROW(daily_savings(1, 0), std::invalid_argument);
}

TEST(Policy, NamesRoundTrip) {
  for (PolicyKind k : {PolicyKind::kSced, PolicyKind::kLad, PolicyKind::kSlad, PolicyKind::kPlad, PolicyKind::kPd})
    EXPECT_EQ(parse_policy(to_string(k)), k);
  EXPECT_EQ(parse_policy("Slad"), PolicyKind::kSlad);
  EXPECT_THROW(parse_policy("mpc"), std::invalid_argument);
  PolicySpec p;
  p.kind = PolicyKind::kSced;
  EXPECT_EQ(p.normalized(10).horizon, 1u);
  p.kind = PolicyKind::kPd;
  EXPECT_EQ(p.normalized(10).horizon, 10u);
}
