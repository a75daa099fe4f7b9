#include "slad/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace slad {

LinearRow::LinearRow(std::initializer_list<std::pair<int, double>> terms, RowSense s, double r) : sense(s), rhs(r) {
  for (const auto& [var, coef] : terms) add(var, coef);
}

int LinearProgram::add_variable(double lo, double hi, double cost) {
  if (std::isnan(lo) || std::isnan(hi) || lo > hi) throw std::invalid_argument("invalid variable bounds");
  if (!std::isfinite(cost)) throw std::invalid_argument("non-finite objective coefficient");
  lo_.push_back(lo);
  hi_.push_back(hi);
  cost_.push_back(cost);
  return num_variables() - 1;
}

int LinearProgram::add_row(LinearRow row) {
  if (row.index.size() != row.value.size()) throw std::invalid_argument("row index/value size mismatch");
  if (!std::isfinite(row.rhs)) throw std::invalid_argument("non-finite row rhs");
  for (std::size_t k = 0; k < row.index.size(); ++k) {
    if (row.index[k] < 0 || row.index[k] >= num_variables()) throw std::invalid_argument("row references unknown variable");
    if (!std::isfinite(row.value[k])) throw std::invalid_argument("non-finite row coefficient");
  }
  rows_.push_back(std::move(row));
  return num_rows() - 1;
}

void LinearProgram::set_rhs(int row, double rhs) {
  if (!std::isfinite(rhs)) throw std::invalid_argument("non-finite row rhs");
  rows_.at(row).rhs = rhs;
}

void LinearProgram::set_bounds(int var, double lo, double hi) {
  if (std::isnan(lo) || std::isnan(hi) || lo > hi) throw std::invalid_argument("invalid variable bounds");
  lo_.at(var) = lo;
  hi_.at(var) = hi;
}

std::string_view to_string(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kUnbounded: return "unbounded";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kIterationLimit: return "iteration_limit";
  }
  return "unknown";
}

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kDropTol = 1e-14;
constexpr double kDegenerateStep = 1e-12;

// Each row i reads  a_i x - s_i = 0  with the logical s_i bounded by the
// row sense, so every right-hand side lives in the logical bounds.
class Simplex {
 public:
  Simplex(const LinearProgram& lp, const SolveOptions& opts) : lp_(lp), opts_(opts) {
    n_ = lp.num_variables();
    m_ = lp.num_rows();
    const int total = n_ + m_;
    lo_.resize(total);
    up_.resize(total);
    cost_.assign(total, 0.0);
    for (int j = 0; j < n_; ++j) {
      lo_[j] = lp.lower(j);
      up_[j] = lp.upper(j);
      cost_[j] = lp.cost(j);
    }
    std::vector<std::vector<std::pair<int, double>>> cols(n_);
    for (int i = 0; i < m_; ++i) {
      const LinearRow& row = lp.row(i);
      for (std::size_t k = 0; k < row.index.size(); ++k) {
        if (row.value[k] != 0.0) cols[row.index[k]].emplace_back(i, row.value[k]);
      }
      switch (row.sense) {
        case RowSense::kLessEqual: lo_[n_ + i] = -kInfinityD; up_[n_ + i] = row.rhs; break;
        case RowSense::kGreaterEqual: lo_[n_ + i] = row.rhs; up_[n_ + i] = kInfinityD; break;
        case RowSense::kEqual: lo_[n_ + i] = row.rhs; up_[n_ + i] = row.rhs; break;
      }
    }
    col_start_.push_back(0);
    for (int j = 0; j < n_; ++j) {
      // Merge duplicate row entries within a column.
      std::sort(cols[j].begin(), cols[j].end());
      for (std::size_t k = 0; k < cols[j].size(); ++k) {
        if (!row_idx_.empty() && static_cast<int>(row_idx_.size()) > col_start_.back() &&
            row_idx_.back() == cols[j][k].first) {
          col_val_.back() += cols[j][k].second;
        } else {
          row_idx_.push_back(cols[j][k].first);
          col_val_.push_back(cols[j][k].second);
        }
      }
      col_start_.push_back(static_cast<int>(row_idx_.size()));
    }
  }

  LpSolution run(const Basis* warm) {
    LpSolution sol;
    if (!(warm && install_basis(*warm))) install_slack_basis();

    long iters = 0;
    int final_checks = 0;
    int stall_retries = 0;
    int degenerate_run = 0;
    bool bland = false;
    std::vector<double> cb(m_), y(m_), alpha(m_);

    while (true) {
      if (iters >= opts_.max_iters) {
        sol.status = LpStatus::kIterationLimit;
        break;
      }
      if (static_cast<int>(etas_.size()) >= opts_.refactor_interval) refactor_or_reset();

      bool infeasible = false;
      for (int k = 0; k < m_; ++k) {
        const int j = head_[k];
        if (x_[j] < lo_[j] - ftol(lo_[j])) {
          cb[k] = -1.0;
          infeasible = true;
        } else if (x_[j] > up_[j] + ftol(up_[j])) {
          cb[k] = 1.0;
          infeasible = true;
        } else {
          cb[k] = 0.0;
        }
      }
      if (!infeasible) {
        for (int k = 0; k < m_; ++k) cb[k] = cost_[head_[k]];
      }
      btran(cb, y);

      int enter = -1;
      double enter_d = 0.0;
      double best = 0.0;
      for (int j = 0; j < n_ + m_; ++j) {
        const BasisStatus st = status_[j];
        if (st == BasisStatus::kBasic || lo_[j] == up_[j]) continue;
        const double d = (infeasible ? 0.0 : cost_[j]) - column_dot(j, y);
        const double tol = opts_.opt_tol * (infeasible ? 1.0 : std::max(1.0, std::abs(cost_[j])));
        bool improving = false;
        if (st == BasisStatus::kAtLower) improving = d < -tol;
        else if (st == BasisStatus::kAtUpper) improving = d > tol;
        else improving = std::abs(d) > tol;
        if (!improving) continue;
        if (bland) {
          enter = j;
          enter_d = d;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          enter = j;
          enter_d = d;
        }
      }

      if (enter < 0) {
        // Confirm with a fresh factorization before concluding.
        if (!etas_.empty() && final_checks++ < 5) {
          refactor_or_reset();
          continue;
        }
        sol.status = infeasible ? LpStatus::kInfeasible : LpStatus::kOptimal;
        break;
      }

      const double dir = enter_d < 0.0 ? 1.0 : -1.0;
      ftran_column(enter, alpha);

      // Ratio test; Harris two-pass unless Bland's rule is active.
      double theta_max = kInfinityD;
      for (int k = 0; k < m_; ++k) {
        if (std::abs(alpha[k]) <= kPivotTol) continue;
        const double relaxed = ratio(k, dir * alpha[k], /*relax=*/!bland);
        theta_max = std::min(theta_max, relaxed);
      }
      int leave = -1;
      double step = kInfinityD;
      double best_pivot = 0.0;
      for (int k = 0; k < m_; ++k) {
        if (std::abs(alpha[k]) <= kPivotTol) continue;
        const double exact = ratio(k, dir * alpha[k], false);
        if (!std::isfinite(exact)) continue;
        if (bland) {
          if (exact < step - kDegenerateStep ||
              (std::abs(exact - step) <= kDegenerateStep && leave >= 0 && head_[k] < head_[leave])) {
            step = exact;
            leave = k;
          }
        } else if (exact <= theta_max) {
          const double piv = std::abs(alpha[k]);
          if (piv > best_pivot || (piv == best_pivot && leave >= 0 && head_[k] < head_[leave])) {
            best_pivot = piv;
            leave = k;
            step = exact;
          }
        }
      }
      step = std::max(step, 0.0);
      const double range = up_[enter] - lo_[enter];
      const bool flip = std::isfinite(range) && (leave < 0 || range <= step);

      if (leave < 0 && !flip) {
        if (!infeasible) {
          sol.status = LpStatus::kUnbounded;
          break;
        }
        if (stall_retries++ < 3) {
          refactor_or_reset();
          continue;
        }
        sol.status = LpStatus::kInfeasible;
        break;
      }

      ++iters;
      if (flip) step = range;
      const bool leave_to_lower = !flip && leaving_to_lower(head_[leave], dir * alpha[leave]);
      x_[enter] += dir * step;
      if (step != 0.0) {
        for (int k = 0; k < m_; ++k) {
          if (alpha[k] != 0.0) x_[head_[k]] -= dir * step * alpha[k];
        }
      }
      if (flip) {
        status_[enter] = dir > 0 ? BasisStatus::kAtUpper : BasisStatus::kAtLower;
        x_[enter] = dir > 0 ? up_[enter] : lo_[enter];
      } else {
        const int out = head_[leave];
        x_[out] = leave_to_lower ? lo_[out] : up_[out];
        status_[out] = leave_to_lower ? BasisStatus::kAtLower : BasisStatus::kAtUpper;
        head_[leave] = enter;
        status_[enter] = BasisStatus::kBasic;
        push_eta(leave, alpha);
      }

      if (step <= kDegenerateStep) {
        if (++degenerate_run >= opts_.degeneracy_streak) bland = true;
      } else {
        degenerate_run = 0;
        bland = false;
      }
    }

    sol.iterations = iters;
    sol.primal.assign(x_.begin(), x_.begin() + n_);
    sol.objective = lp_.objective_constant;
    for (int j = 0; j < n_; ++j) sol.objective += cost_[j] * x_[j];
    sol.basis.status = status_;
    if (sol.status == LpStatus::kOptimal) {
      for (int k = 0; k < m_; ++k) cb[k] = cost_[head_[k]];
      btran(cb, y);
      sol.duals = y;
      sol.reduced_costs.assign(n_, 0.0);
      for (int j = 0; j < n_; ++j) {
        if (status_[j] != BasisStatus::kBasic) sol.reduced_costs[j] = cost_[j] - column_dot(j, y);
      }
    } else {
      sol.duals.assign(m_, 0.0);
      sol.reduced_costs.assign(n_, 0.0);
    }
    return sol;
  }

 private:
  static constexpr double kInfinityD = std::numeric_limits<double>::infinity();

  struct Eta {
    int pos;
    double pivot;
    std::vector<std::pair<int, double>> entries;
  };

  double ftol(double bound) const { return opts_.feas_tol * std::max(1.0, std::abs(bound)); }

  double column_dot(int j, const std::vector<double>& y) const {
    if (j >= n_) return -y[j - n_];
    double s = 0.0;
    for (int p = col_start_[j]; p < col_start_[j + 1]; ++p) s += col_val_[p] * y[row_idx_[p]];
    return s;
  }

  // Limit on the step for basic position k whose value falls at `rate` per
  // unit step. Infeasible basics only limit the step at the bound they are
  // moving towards.
  double ratio(int k, double rate, bool relax) const {
    const int j = head_[k];
    const double v = x_[j];
    const double l = lo_[j], u = up_[j];
    if (rate > 0.0) {
      if (v < l - ftol(l)) return kInfinityD;
      const double bound = v > u + ftol(u) ? u : l;
      if (!std::isfinite(bound)) return kInfinityD;
      const double slack = v - bound + (relax ? ftol(bound) : 0.0);
      return std::max(slack, 0.0) / rate;
    }
    if (v > u + ftol(u)) return kInfinityD;
    const double bound = v < l - ftol(l) ? l : u;
    if (!std::isfinite(bound)) return kInfinityD;
    const double slack = bound - v + (relax ? ftol(bound) : 0.0);
    return std::max(slack, 0.0) / -rate;
  }

  bool leaving_to_lower(int j, double rate) const {
    const double v = x_[j];
    if (rate > 0.0) return !(v > up_[j] + ftol(up_[j]));
    return v < lo_[j] - ftol(lo_[j]);
  }

  void set_nonbasic_value(int j) {
    if (status_[j] == BasisStatus::kAtLower && !std::isfinite(lo_[j])) status_[j] = BasisStatus::kAtUpper;
    if (status_[j] == BasisStatus::kAtUpper && !std::isfinite(up_[j])) {
      status_[j] = std::isfinite(lo_[j]) ? BasisStatus::kAtLower : BasisStatus::kFree;
    }
    if (status_[j] == BasisStatus::kFree) {
      if (std::isfinite(lo_[j])) status_[j] = BasisStatus::kAtLower;
      else if (std::isfinite(up_[j])) status_[j] = BasisStatus::kAtUpper;
    }
    switch (status_[j]) {
      case BasisStatus::kAtLower: x_[j] = lo_[j]; break;
      case BasisStatus::kAtUpper: x_[j] = up_[j]; break;
      default: x_[j] = 0.0; break;
    }
  }

  void install_slack_basis() {
    status_.assign(n_ + m_, BasisStatus::kAtLower);
    x_.assign(n_ + m_, 0.0);
    head_.resize(m_);
    for (int j = 0; j < n_; ++j) set_nonbasic_value(j);
    for (int i = 0; i < m_; ++i) {
      status_[n_ + i] = BasisStatus::kBasic;
      head_[i] = n_ + i;
    }
    if (!factor()) throw std::logic_error("slack basis failed to factor");
    recompute_primal();
  }

  bool install_basis(const Basis& basis) {
    if (static_cast<int>(basis.status.size()) != n_ + m_) return false;
    int basic = 0;
    for (auto st : basis.status) basic += st == BasisStatus::kBasic;
    if (basic != m_) return false;
    status_ = basis.status;
    x_.assign(n_ + m_, 0.0);
    head_.clear();
    for (int j = 0; j < n_ + m_; ++j) {
      if (status_[j] == BasisStatus::kBasic) head_.push_back(j);
      else set_nonbasic_value(j);
    }
    if (!factor()) return false;
    recompute_primal();
    return true;
  }

  bool factor() {
    etas_.clear();
    std::vector<Eigen::Triplet<double>> trips;
    for (int k = 0; k < m_; ++k) {
      const int j = head_[k];
      if (j >= n_) {
        trips.emplace_back(j - n_, k, -1.0);
      } else {
        for (int p = col_start_[j]; p < col_start_[j + 1]; ++p) trips.emplace_back(row_idx_[p], k, col_val_[p]);
      }
    }
    Eigen::SparseMatrix<double> basis(m_, m_);
    basis.setFromTriplets(trips.begin(), trips.end());
    basis.makeCompressed();
    if (m_ == 0) return true;
    lu_.analyzePattern(basis);
    lu_.factorize(basis);
    return lu_.info() == Eigen::Success;
  }

  void refactor_or_reset() {
    if (!factor()) {
      // Numerically singular basis: restart from the logical basis.
      install_slack_basis();
      return;
    }
    recompute_primal();
  }

  void recompute_primal() {
    if (m_ == 0) return;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m_);
    for (int j = 0; j < n_ + m_; ++j) {
      if (status_[j] == BasisStatus::kBasic || x_[j] == 0.0) continue;
      if (j >= n_) {
        rhs[j - n_] += x_[j];
      } else {
        for (int p = col_start_[j]; p < col_start_[j + 1]; ++p) rhs[row_idx_[p]] -= col_val_[p] * x_[j];
      }
    }
    Eigen::VectorXd xb = lu_.solve(rhs);
    for (int k = 0; k < m_; ++k) x_[head_[k]] = xb[k];
  }

  void ftran_column(int j, std::vector<double>& out) {
    if (m_ == 0) return;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m_);
    if (j >= n_) {
      rhs[j - n_] = -1.0;
    } else {
      for (int p = col_start_[j]; p < col_start_[j + 1]; ++p) rhs[row_idx_[p]] = col_val_[p];
    }
    Eigen::VectorXd w = lu_.solve(rhs);
    for (const Eta& eta : etas_) {
      const double wr = w[eta.pos] / eta.pivot;
      w[eta.pos] = wr;
      if (wr != 0.0) {
        for (const auto& [i, a] : eta.entries) w[i] -= a * wr;
      }
    }
    for (int k = 0; k < m_; ++k) out[k] = std::abs(w[k]) < kDropTol ? 0.0 : w[k];
  }

  void btran(const std::vector<double>& c, std::vector<double>& y) {
    if (m_ == 0) return;
    Eigen::VectorXd v(m_);
    for (int k = 0; k < m_; ++k) v[k] = c[k];
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double s = v[it->pos];
      for (const auto& [i, a] : it->entries) s -= a * v[i];
      v[it->pos] = s / it->pivot;
    }
    Eigen::VectorXd w = lu_.transpose().solve(v);
    for (int i = 0; i < m_; ++i) y[i] = w[i];
  }

  void push_eta(int pos, const std::vector<double>& alpha) {
    Eta eta{pos, alpha[pos], {}};
    for (int k = 0; k < m_; ++k) {
      if (k != pos && alpha[k] != 0.0) eta.entries.emplace_back(k, alpha[k]);
    }
    etas_.push_back(std::move(eta));
  }

  const LinearProgram& lp_;
  SolveOptions opts_;
  int n_ = 0, m_ = 0;
  std::vector<int> col_start_, row_idx_;
  std::vector<double> col_val_;
  std::vector<double> lo_, up_, cost_;
  std::vector<BasisStatus> status_;
  std::vector<double> x_;
  std::vector<int> head_;
  std::vector<Eta> etas_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, const SolveOptions& opts, const Basis* warm_start) {
  Simplex simplex(lp, opts);
  return simplex.run(warm_start);
}

LpSolution append_rows_and_resolve(LinearProgram& lp, const LpSolution& previous, std::span<const LinearRow> rows,
                                   const SolveOptions& opts) {
  for (const LinearRow& row : rows) lp.add_row(row);
  Basis warm = previous.basis;
  if (static_cast<int>(warm.status.size()) + static_cast<int>(rows.size()) == lp.num_variables() + lp.num_rows()) {
    warm.status.insert(warm.status.end(), rows.size(), BasisStatus::kBasic);
    return solve_lp(lp, opts, &warm);
  }
  return solve_lp(lp, opts);
}

KktReport verify_kkt(const LinearProgram& lp, const LpSolution& sol, double tol) {
  KktReport report;
  const int n = lp.num_variables();
  const int m = lp.num_rows();
  if (static_cast<int>(sol.primal.size()) != n || static_cast<int>(sol.duals.size()) != m) {
    report.primal_residual = std::numeric_limits<double>::infinity();
    return report;
  }
  std::vector<double> d(lp.costs());
  for (int i = 0; i < m; ++i) {
    const LinearRow& row = lp.row(i);
    double activity = 0.0;
    for (std::size_t k = 0; k < row.index.size(); ++k) {
      activity += row.value[k] * sol.primal[row.index[k]];
      d[row.index[k]] -= sol.duals[i] * row.value[k];
    }
    const double gap = activity - row.rhs;
    const double y = sol.duals[i];
    switch (row.sense) {
      case RowSense::kLessEqual:
        report.primal_residual = std::max(report.primal_residual, gap);
        report.dual_residual = std::max(report.dual_residual, y);
        break;
      case RowSense::kGreaterEqual:
        report.primal_residual = std::max(report.primal_residual, -gap);
        report.dual_residual = std::max(report.dual_residual, -y);
        break;
      case RowSense::kEqual:
        report.primal_residual = std::max(report.primal_residual, std::abs(gap));
        break;
    }
    if (row.sense != RowSense::kEqual) {
      report.complementarity = std::max(report.complementarity, std::abs(y) * std::abs(gap));
    }
  }
  for (int j = 0; j < n; ++j) {
    const double x = sol.primal[j];
    const double lo = lp.lower(j), hi = lp.upper(j);
    report.primal_residual = std::max({report.primal_residual, lo - x, x - hi});
    const double above_lo = std::isfinite(lo) ? x - lo : std::numeric_limits<double>::infinity();
    const double below_hi = std::isfinite(hi) ? hi - x : std::numeric_limits<double>::infinity();
    // A positive reduced cost must sit at the lower bound, a negative one at the upper.
    if (d[j] > 0.0) {
      if (!std::isfinite(lo)) report.dual_residual = std::max(report.dual_residual, d[j]);
      else report.complementarity = std::max(report.complementarity, d[j] * std::max(above_lo, 0.0));
      if (std::isfinite(lo) && above_lo > tol) report.dual_residual = std::max(report.dual_residual, d[j]);
    } else if (d[j] < 0.0) {
      if (!std::isfinite(hi)) report.dual_residual = std::max(report.dual_residual, -d[j]);
      else report.complementarity = std::max(report.complementarity, -d[j] * std::max(below_hi, 0.0));
      if (std::isfinite(hi) && below_hi > tol) report.dual_residual = std::max(report.dual_residual, -d[j]);
    }
  }
  report.pass = report.primal_residual <= tol && report.dual_residual <= tol && report.complementarity <= tol;
  return report;
}

std::string to_lp_format(const LinearProgram& lp) {
  std::ostringstream out;
  out.precision(17);
  auto term = [&](double coef, int var, bool first) {
    if (coef < 0) out << " - " << -coef << " x" << var;
    else out << (first ? " " : " + ") << coef << " x" << var;
  };
  out << "\\ objective constant " << lp.objective_constant << "\n";
  out << "Minimize\n obj:";
  bool first = true;
  for (int j = 0; j < lp.num_variables(); ++j) {
    if (lp.cost(j) == 0.0) continue;
    term(lp.cost(j), j, first);
    first = false;
  }
  if (first) out << " 0 x0";
  out << "\nSubject To\n";
  for (int i = 0; i < lp.num_rows(); ++i) {
    const LinearRow& row = lp.row(i);
    out << " r" << i << ":";
    bool f = true;
    for (std::size_t k = 0; k < row.index.size(); ++k) {
      term(row.value[k], row.index[k], f);
      f = false;
    }
    if (f) out << " 0 x0";
    switch (row.sense) {
      case RowSense::kLessEqual: out << " <= "; break;
      case RowSense::kGreaterEqual: out << " >= "; break;
      case RowSense::kEqual: out << " = "; break;
    }
    out << row.rhs << "\n";
  }
  out << "Bounds\n";
  for (int j = 0; j < lp.num_variables(); ++j) {
    const double lo = lp.lower(j), hi = lp.upper(j);
    if (!std::isfinite(lo) && !std::isfinite(hi)) {
      out << " x" << j << " free\n";
      continue;
    }
    out << " ";
    if (std::isfinite(lo)) out << lo;
    else out << "-inf";
    out << " <= x" << j << " <= ";
    if (std::isfinite(hi)) out << hi;
    else out << "+inf";
    out << "\n";
  }
  out << "End\n";
  return out.str();
}

}  // namespace slad
