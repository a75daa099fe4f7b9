#include "slad/benders.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace slad {

void BendersConfig::validate() const {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (max_iter == 0) throw std::invalid_argument("max_iter must be positive");
}

std::string_view to_string(BendersStatus status) {
  return status == BendersStatus::kOptimal ? "optimal" : "iteration_limit";
}

double BendersState::gap() const {
  if (!std::isfinite(ub) || !std::isfinite(lb)) return kInfinity;
  return (ub - lb) / std::max(1.0, std::abs(ub));
}

std::vector<double> in_out_candidate(std::span<const double> x_bar, std::span<const double> x_hat, double alpha) {
  if (x_bar.size() != x_hat.size()) throw std::invalid_argument("in_out_candidate: dimension mismatch");
  std::vector<double> x(x_bar.size());
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = alpha * x_hat[j] + (1.0 - alpha) * x_bar[j];
  return x;
}

Cut separate_benders_cut(const LpSolution& sol, const DispatchModel& sub, std::size_t scenario) {
  if (sol.status != LpStatus::kOptimal)
    throw SolveError("cannot separate a cut from a " + std::string(to_string(sol.status)) + " subproblem", sol.status);
  const LinearProgram& lp = sub.lp;
  const auto& consensus = sub.vmap.consensus_rows;
  std::vector<char> is_consensus(lp.num_rows(), 0);
  for (int r : consensus) is_consensus[r] = 1;

  Cut cut;
  cut.scenario = scenario;
  cut.coef_x1.resize(consensus.size());
  for (std::size_t j = 0; j < consensus.size(); ++j) cut.coef_x1[j] = sol.duals[consensus[j]];

  double constant = lp.objective_constant;
  for (int i = 0; i < lp.num_rows(); ++i)
    if (!is_consensus[i]) constant += sol.duals[i] * lp.row(i).rhs;
  for (int j = 0; j < lp.num_variables(); ++j) {
    const double d = sol.reduced_costs[j];
    if (d > 0.0 && std::isfinite(lp.lower(j))) constant += d * lp.lower(j);
    else if (d < 0.0 && std::isfinite(lp.upper(j))) constant += d * lp.upper(j);
  }
  cut.rhs_const = constant;
  return cut;
}

// ---------------------------------------------------------------- lazy flows

std::vector<FlowViolation> lazy_flow_separation(const Injections& injections, const ValidatedCase& vcase, double tol,
                                                std::span<const double> current_violation) {
  std::vector<FlowViolation> out;
  const std::size_t E = vcase.num_branches(), N = vcase.num_buses();
  for (std::size_t s = 0; s < injections.size(); ++s) {
    const std::size_t T = injections[s].size();
    for (std::size_t t = 0; t < T; ++t) {
      const auto& p = injections[s][t];
      if (p.size() != N) throw std::invalid_argument("injections do not cover every bus");
      for (std::size_t e = 0; e < E; ++e) {
        const Branch& br = vcase->branches[e];
        if (!br.monitored) continue;
        double flow = 0.0;
        for (std::size_t i = 0; i < N; ++i) flow += vcase.ptdf(e, i) * p[i];
        const double allowance = current_violation.empty() ? 0.0 : current_violation[(s * T + t) * E + e];
        const double over = flow - br.limit_hi - allowance;
        const double under = br.limit_lo - allowance - flow;
        if (over > tol) out.push_back({e, t, s, flow, over, true});
        else if (under > tol) out.push_back({e, t, s, flow, under, false});
      }
    }
  }
  return out;
}

Injections model_injections(const LpSolution& sol, const VariableMap& vm) {
  const std::size_t S = vm.scenarios(), T = vm.periods, N = vm.num_buses;
  Injections inj(S, std::vector<std::vector<double>>(T, std::vector<double>(N, 0.0)));
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t t = 0; t < T; ++t) {
      auto& p = inj[s][t];
      for (std::size_t i = 0; i < N; ++i) p[i] = -vm.bus_load[(s * T + t) * N + i];
      for (std::size_t g = 0; g < vm.num_generators; ++g) {
        const auto col = vm.column(VarKind::kPg, static_cast<int>(g), static_cast<int>(t), static_cast<int>(s));
        if (col) p[vm.gen_bus[g]] += sol.primal.at(*col);
      }
    }
  return inj;
}

LpSolution solve_with_lazy_flows(DispatchModel& model, const ValidatedCase& vcase, double tol, const SolveOptions& opts,
                                 const Basis* warm) {
  LpSolution sol = solve_lp(model.lp, opts, warm);
  auto& vm = model.vmap;
  const std::size_t T = vm.periods, E = vm.num_branches;
  while (sol.status == LpStatus::kOptimal) {
    const Injections inj = model_injections(sol, vm);
    std::vector<double> allowance(vm.scenarios() * T * E, 0.0);
    for (std::size_t s = 0; s < vm.scenarios(); ++s)
      for (std::size_t t = 0; t < T; ++t)
        for (std::size_t e = 0; e < E; ++e) {
          const auto col = vm.column(VarKind::kFlowViolation, static_cast<int>(e), static_cast<int>(t), static_cast<int>(s));
          if (col) allowance[(s * T + t) * E + e] = sol.primal[*col];
        }
    std::vector<LinearRow> rows;
    std::vector<RowKey> keys;
    for (const auto& v : lazy_flow_separation(inj, vcase, tol, allowance)) {
      const int e = static_cast<int>(v.branch), t = static_cast<int>(v.period), s = static_cast<int>(v.scenario);
      const RowFamily family = v.upper ? RowFamily::kFlowUpper : RowFamily::kFlowLower;
      if (!vm.column(VarKind::kFlowViolation, e, t, s) || vm.row(family, e, t, s)) continue;
      rows.push_back(flow_limit_row(vm, v.branch, v.period, v.scenario, v.upper));
      keys.push_back({family, e, t, s});
    }
    if (rows.empty()) break;
    const int first = model.lp.num_rows();
    sol = append_rows_and_resolve(model.lp, sol, rows, opts);
    for (std::size_t k = 0; k < keys.size(); ++k) vm.add_row(keys[k], first + static_cast<int>(k));
  }
  return sol;
}

// ---------------------------------------------------------------- algorithm

namespace {

using Clock = std::chrono::steady_clock;

Scenario first_period_of(const Scenario& sc) {
  Scenario cur;
  cur.name = sc.name;
  cur.load.push_back(sc.load.at(0));
  for (const auto& [g, series] : sc.pmax_override) cur.pmax_override[g] = {series.at(0)};
  return cur;
}

struct Recourse {
  double value = 0.0;
  Cut cut;
};

class SubproblemPool {
 public:
  SubproblemPool(const ValidatedCase& vcase, const SystemState& state, const ScenarioSet& scenarios,
                 const BendersConfig& cfg, std::size_t dim)
      : vcase_(vcase), cfg_(cfg) {
    const std::vector<double> zero(dim, 0.0);
    const BuildOptions opts{cfg.lazy_flows ? FlowMode::kLazy : FlowMode::kFull};
    for (std::size_t s = 0; s < scenarios.size(); ++s) {
      models_.push_back(build_benders_subproblem(vcase, state, scenarios, s, zero, opts));
      bases_.emplace_back();
    }
  }

  std::size_t size() const { return models_.size(); }

  // Evaluates every scenario at x; results come back in scenario order.
  std::vector<Recourse> evaluate(std::span<const double> x) {
    std::vector<Recourse> out(size());
    std::vector<std::string> errors(size());
    auto work = [&](std::size_t s) {
      try {
        out[s] = solve_one(s, x);
      } catch (const std::exception& ex) {
        errors[s] = ex.what();
      }
    };
    const std::size_t workers = std::clamp<std::size_t>(cfg_.workers, 1, std::max<std::size_t>(1, size()));
    if (workers == 1) {
      for (std::size_t s = 0; s < size(); ++s) work(s);
    } else {
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
          for (std::size_t s = w; s < size(); s += workers) work(s);
        });
      for (auto& th : pool) th.join();
    }
    for (std::size_t s = 0; s < size(); ++s)
      if (!errors[s].empty()) throw std::runtime_error("scenario " + std::to_string(s) + ": " + errors[s]);
    return out;
  }

 private:
  Recourse solve_one(std::size_t s, std::span<const double> x) {
    DispatchModel& m = models_[s];
    set_consensus_point(m, x);
    const Basis* warm = bases_[s].empty() ? nullptr : &bases_[s];
    LpSolution sol = solve_with_lazy_flows(m, vcase_, cfg_.lazy_flow_tol, cfg_.lp, warm);
    if (sol.status != LpStatus::kOptimal)
      throw SolveError("subproblem is " + std::string(to_string(sol.status)), sol.status);
    bases_[s] = sol.basis;
    return {sol.objective, separate_benders_cut(sol, m, s)};
  }

  const ValidatedCase& vcase_;
  const BendersConfig& cfg_;
  std::vector<DispatchModel> models_;
  std::vector<Basis> bases_;
};

bool same_cut(const Cut& a, const Cut& b) {
  if (std::abs(a.rhs_const - b.rhs_const) > 1e-9 * std::max(1.0, std::abs(a.rhs_const))) return false;
  for (std::size_t j = 0; j < a.coef_x1.size(); ++j)
    if (std::abs(a.coef_x1[j] - b.coef_x1[j]) > 1e-9 * std::max(1.0, std::abs(a.coef_x1[j]))) return false;
  return true;
}

}  // namespace

BendersResult run_benders(const ValidatedCase& vcase, const SystemState& state, const ScenarioSet& scenarios,
                          const BendersConfig& cfg) {
  cfg.validate();
  const std::size_t S = scenarios.size();
  const BuildOptions opts{cfg.lazy_flows ? FlowMode::kLazy : FlowMode::kFull};

  if (S == 0) throw std::invalid_argument("Benders decomposition needs at least one scenario");
  const Scenario current = first_period_of(scenarios.scenarios.front());
  std::vector<double> probs;
  for (const auto& sc : scenarios.scenarios) probs.push_back(sc.prob);

  BendersResult result;
  BendersState& st = result.state;
  st.cuts.assign(S, {});

  DispatchModel master = build_benders_master(vcase, state, current, probs, st.cuts, cfg.theta_lower, opts);
  LpSolution msol = solve_with_lazy_flows(master, vcase, cfg.lazy_flow_tol, cfg.lp);
  if (msol.status != LpStatus::kOptimal)
    throw SolveError("master problem is " + std::string(to_string(msol.status)), msol.status);

  std::vector<int> theta_cols(S);
  for (std::size_t s = 0; s < S; ++s) theta_cols[s] = *master.vmap.column(VarKind::kTheta, static_cast<int>(s), 0, 0);

  SubproblemPool pool(vcase, state, scenarios, cfg, master.vmap.first_stage_columns.size());
  st.x_bar = first_stage_vector(msol, master.vmap);
  st.x_hat = st.x_bar;  // core point starts at the first master solution
  st.lb = msol.objective;

  for (st.iteration = 1; st.iteration <= cfg.max_iter; ++st.iteration) {
    const auto iter_start = Clock::now();
    std::vector<double> theta(S);
    double theta_term = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      theta[s] = msol.primal[theta_cols[s]];
      theta_term += probs[s] * theta[s];
    }
    const double first_cost = msol.objective - theta_term;

    auto violated = [&](const Recourse& r, std::size_t s) {
      const double tol = 0.1 * cfg.epsilon * std::max(1.0, std::abs(r.value));
      return r.cut.evaluate(st.x_bar) > theta[s] + tol;
    };

    std::vector<Cut> fresh;
    auto collect = [&](std::vector<Recourse>& rs, bool core) {
      std::size_t n = 0;
      for (std::size_t s = 0; s < S; ++s) {
        if (!violated(rs[s], s)) continue;
        rs[s].cut.iteration = st.iteration;
        rs[s].cut.from_core_point = core;
        fresh.push_back(rs[s].cut);
        ++n;
      }
      return n;
    };

    st.x_tilde = in_out_candidate(st.x_bar, st.x_hat, cfg.alpha);
    const bool distinct = st.x_tilde != st.x_bar;
    bool first_found = false;
    if (distinct) {
      auto at_tilde = pool.evaluate(st.x_tilde);
      first_found = collect(at_tilde, true) > 0;
    }
    // The master point is always evaluated: it re-seeds separation when the
    // in-out point found nothing and supplies the upper bound either way.
    auto at_bar = pool.evaluate(st.x_bar);
    double recourse = 0.0;
    for (std::size_t s = 0; s < S; ++s) recourse += probs[s] * at_bar[s].value;
    const std::size_t from_bar = collect(at_bar, false);
    if (!distinct) first_found = from_bar > 0;
    st.x_hat = first_found && distinct ? st.x_tilde : st.x_bar;

    const double candidate = first_cost + recourse;
    if (candidate < st.ub) {
      st.ub = candidate;
      result.x1 = st.x_bar;
      result.first_stage = extract_dispatch(msol, master.vmap);
      result.first_stage_cost = first_cost;
    }

    // Drop duplicates of cuts already in the pool.
    std::vector<Cut> added;
    for (auto& c : fresh) {
      auto& pool_s = st.cuts[c.scenario];
      const bool dup = std::any_of(pool_s.begin(), pool_s.end(), [&](const Cut& o) { return same_cut(o, c); }) ||
                       std::any_of(added.begin(), added.end(), [&](const Cut& o) { return same_cut(o, c); });
      if (!dup) added.push_back(c);
    }

    BendersIteration rec;
    rec.iteration = st.iteration;
    rec.lb = st.lb;
    rec.ub = st.ub;
    rec.gap = st.gap();
    rec.cuts_added = added.size();
    rec.reseeded = distinct && !first_found;

    const bool done = added.empty() || rec.gap <= cfg.epsilon;
    if (done) {
      rec.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - iter_start).count();
      st.history.push_back(rec);
      st.status = BendersStatus::kOptimal;
      break;
    }

    std::vector<LinearRow> rows;
    for (const auto& c : added) rows.push_back(cut_row(master.vmap, c));
    const int first_row = master.lp.num_rows();
    msol = append_rows_and_resolve(master.lp, msol, rows, cfg.lp);
    for (std::size_t k = 0; k < added.size(); ++k) {
      register_cut_row(master.vmap, added[k], first_row + static_cast<int>(k));
      st.cuts[added[k].scenario].push_back(added[k]);
    }
    if (msol.status == LpStatus::kOptimal && cfg.lazy_flows)
      msol = solve_with_lazy_flows(master, vcase, cfg.lazy_flow_tol, cfg.lp, &msol.basis);
    if (msol.status != LpStatus::kOptimal)
      throw SolveError("master problem is " + std::string(to_string(msol.status)), msol.status);
    st.x_bar = first_stage_vector(msol, master.vmap);
    st.lb = std::max(st.lb, msol.objective);

    rec.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - iter_start).count();
    st.history.push_back(rec);
  }
  if (st.iteration > cfg.max_iter) st.iteration = cfg.max_iter;
  result.objective = st.ub;
  result.first_stage.objective = st.ub;
  return result;
}

std::string format_trace(const BendersState& state) {
  std::ostringstream os;
  os << std::setprecision(12);
  os << "iteration,lb,ub,gap,cuts_added,wall_ms\n";
  for (const auto& h : state.history)
    os << h.iteration << ',' << h.lb << ',' << h.ub << ',' << h.gap << ',' << h.cuts_added << ',' << h.wall_ms << '\n';
  return os.str();
}

}  // namespace slad
