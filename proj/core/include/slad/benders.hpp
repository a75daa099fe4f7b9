#pragma once

// Benders decomposition of the stochastic look-ahead dispatch with in-out
// separation, a core point, lazy flowgate rows and parallel subproblems.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "slad/formulation.hpp"
#include "slad/lp.hpp"
#include "slad/model.hpp"

namespace slad {

struct BendersConfig {
  double epsilon = 1e-5;       // relative gap (UB - LB) / max(1, |UB|)
  std::size_t max_iter = 100;
  double alpha = 0.5;          // in-out weight on the core point
  double theta_lower = -1e12;  // initial bound on every theta_s
  double lazy_flow_tol = 1e-6;
  bool lazy_flows = true;
  std::size_t workers = 1;
  SolveOptions lp;

  /// Throws std::invalid_argument unless 0 <= alpha < 1 and epsilon > 0.
  void validate() const;
};

enum class BendersStatus { kOptimal, kIterationLimit };
std::string_view to_string(BendersStatus status);

struct BendersIteration {
  std::size_t iteration = 0;
  double lb = 0.0;
  double ub = 0.0;
  double gap = 0.0;
  std::size_t cuts_added = 0;
  bool reseeded = false;  // the in-out point gave no violated cut
  double wall_ms = 0.0;
};

struct BendersState {
  double lb = -kInfinity;
  double ub = kInfinity;
  CutPool cuts;
  std::vector<double> x_bar, x_hat, x_tilde;
  std::size_t iteration = 0;
  std::vector<BendersIteration> history;
  BendersStatus status = BendersStatus::kIterationLimit;

  double gap() const;
};

struct BendersResult {
  DispatchSolution first_stage;  // master solution at the incumbent
  std::vector<double> x1;        // incumbent [g * 5 + product]
  double objective = 0.0;        // incumbent upper bound
  double first_stage_cost = 0.0;
  BendersState state;
};

/// Solves the two-stage problem. Returns the best incumbent even when the
/// iteration limit stops the loop (status kIterationLimit).
BendersResult run_benders(const ValidatedCase& vcase, const SystemState& state, const ScenarioSet& scenarios,
                          const BendersConfig& cfg = {});

/// Optimality cut from a solved subproblem: coefficients are the consensus
/// row duals, the constant collects every other dual times its right-hand
/// side or bound. Throws SolveError if the subproblem is not optimal.
Cut separate_benders_cut(const LpSolution& sub_solution, const DispatchModel& subproblem, std::size_t scenario);

/// alpha * x_hat + (1 - alpha) * x_bar.
std::vector<double> in_out_candidate(std::span<const double> x_bar, std::span<const double> x_hat, double alpha);

struct FlowViolation {
  std::size_t branch = 0;
  std::size_t period = 0;
  std::size_t scenario = 0;
  double flow = 0.0;
  double excess = 0.0;  // beyond the limit plus the current violation
  bool upper = true;
};

/// Per-bus net injections, indexed [scenario][period][bus].
using Injections = std::vector<std::vector<std::vector<double>>>;

/// Every monitored branch, period and scenario whose flow exceeds a limit by
/// more than tol beyond the current violation allowance `current_violation`
/// ([(s * T + t) * E + e], or empty for zeros). An empty result certifies
/// flow feasibility.
std::vector<FlowViolation> lazy_flow_separation(const Injections& injections, const ValidatedCase& vcase, double tol,
                                                std::span<const double> current_violation = {});

/// Net injections of every period and scenario of a solved model.
Injections model_injections(const LpSolution& sol, const VariableMap& vmap);

/// Solves a model built with FlowMode::kLazy, appending violated flowgate
/// rows until none remain. Warm-starts from `warm` when given.
LpSolution solve_with_lazy_flows(DispatchModel& model, const ValidatedCase& vcase, double tol,
                                 const SolveOptions& opts = {}, const Basis* warm = nullptr);

/// Delimited iteration log: iteration,lb,ub,gap,cuts_added,wall_ms.
std::string format_trace(const BendersState& state);

}  // namespace slad
