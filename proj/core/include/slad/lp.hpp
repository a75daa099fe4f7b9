#pragma once

// Reference linear-programming kernel: bounded-variable revised simplex with
// dual extraction and incremental row addition.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace slad {

enum class RowSense : std::uint8_t { kLessEqual, kGreaterEqual, kEqual };

struct LinearRow {
  std::vector<int> index;
  std::vector<double> value;
  RowSense sense = RowSense::kGreaterEqual;
  double rhs = 0.0;

  LinearRow() = default;
  LinearRow(std::initializer_list<std::pair<int, double>> terms, RowSense s, double r);
  void add(int var, double coef) {
    index.push_back(var);
    value.push_back(coef);
  }
};

/// min c'x + constant  s.t.  rows, lo <= x <= hi.
class LinearProgram {
 public:
  int add_variable(double lo, double hi, double cost = 0.0);
  /// Throws std::invalid_argument on out-of-range indices or non-finite rhs.
  int add_row(LinearRow row);

  void set_rhs(int row, double rhs);
  void set_bounds(int var, double lo, double hi);
  void set_cost(int var, double cost) { cost_.at(var) = cost; }

  int num_variables() const noexcept { return static_cast<int>(lo_.size()); }
  int num_rows() const noexcept { return static_cast<int>(rows_.size()); }
  double lower(int var) const { return lo_[var]; }
  double upper(int var) const { return hi_[var]; }
  double cost(int var) const { return cost_[var]; }
  const LinearRow& row(int i) const { return rows_[i]; }
  const std::vector<double>& costs() const noexcept { return cost_; }

  double objective_constant = 0.0;

 private:
  std::vector<double> lo_, hi_, cost_;
  std::vector<LinearRow> rows_;
};

enum class LpStatus : std::uint8_t { kOptimal, kUnbounded, kInfeasible, kIterationLimit };
std::string_view to_string(LpStatus status);

enum class BasisStatus : std::uint8_t { kBasic, kAtLower, kAtUpper, kFree };

/// Simplex basis over structural columns followed by one logical per row.
struct Basis {
  std::vector<BasisStatus> status;
  bool empty() const noexcept { return status.empty(); }
};

struct SolveOptions {
  double feas_tol = 1e-8;
  double opt_tol = 1e-8;
  long max_iters = 200000;
  /// Consecutive degenerate pivots before switching to Bland's rule.
  int degeneracy_streak = 50;
  int refactor_interval = 100;
};

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  std::vector<double> primal;
  /// Row duals, d objective / d rhs: >= rows are nonnegative, <= rows nonpositive.
  std::vector<double> duals;
  std::vector<double> reduced_costs;
  double objective = 0.0;
  long iterations = 0;
  Basis basis;
};

/// Deterministic: equal inputs give bit-identical outputs. A warm start
/// basis that does not fit the program is ignored.
LpSolution solve_lp(const LinearProgram& lp, const SolveOptions& opts = {}, const Basis* warm_start = nullptr);

/// Appends rows to `lp` and re-solves from the previous basis. The result
/// matches a cold solve of the augmented program.
LpSolution append_rows_and_resolve(LinearProgram& lp, const LpSolution& previous, std::span<const LinearRow> rows,
                                   const SolveOptions& opts = {});

struct KktReport {
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double complementarity = 0.0;
  bool pass = false;
};

/// Recomputes reduced costs from the row duals and checks primal feasibility,
/// dual sign conditions and complementary slackness.
KktReport verify_kkt(const LinearProgram& lp, const LpSolution& sol, double tol);

/// CPLEX LP text format, for cross-checking with external solvers.
std::string to_lp_format(const LinearProgram& lp);

}  // namespace slad
