#include "slad/model.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace slad {

namespace {

constexpr double kPtdfTolerance = 1e-9;
constexpr double kProbabilityTolerance = 1e-9;

bool any_negative(const std::vector<double>& v) {
  return std::any_of(v.begin(), v.end(), [](double x) { return !(x >= 0.0); });
}

}  // namespace

std::string ValidationError::join(const std::vector<std::string>& issues) {
  std::ostringstream out;
  for (std::size_t i = 0; i < issues.size(); ++i) {
    if (i) out << "; ";
    out << issues[i];
  }
  return out.str();
}

std::optional<std::size_t> ValidatedCase::bus_index(const std::string& id) const {
  auto it = bus_lookup_.find(id);
  if (it == bus_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> ValidatedCase::generator_index(const std::string& id) const {
  auto it = generator_lookup_.find(id);
  if (it == generator_lookup_.end()) return std::nullopt;
  return it->second;
}

ValidatedCase validate_case(SystemCase case_data) {
  std::vector<std::string> issues;
  ValidatedCase out;

  for (std::size_t i = 0; i < case_data.buses.size(); ++i) {
    const auto& id = case_data.buses[i].id;
    if (!out.bus_lookup_.emplace(id, i).second) issues.push_back("duplicate bus id '" + id + "'");
  }

  for (std::size_t g = 0; g < case_data.generators.size(); ++g) {
    const Generator& gen = case_data.generators[g];
    const std::string who = "generator '" + gen.id + "'";
    if (!out.generator_lookup_.emplace(gen.id, g).second) issues.push_back("duplicate " + who);
    auto bus = out.bus_lookup_.find(gen.bus);
    if (bus == out.bus_lookup_.end()) {
      issues.push_back(who + ": unknown bus '" + gen.bus + "'");
      out.generator_bus_.push_back(0);
    } else {
      out.generator_bus_.push_back(bus->second);
    }
    if (!(gen.pmin <= gen.pmax)) issues.push_back(who + ": pmin exceeds pmax");
    if (!(gen.pmin >= 0.0)) issues.push_back(who + ": negative pmin");
    if (!(gen.initial_output >= 0.0)) issues.push_back(who + ": negative initial_output");
    if (!(gen.ramp_up >= 0.0) || !(gen.ramp_down >= 0.0)) issues.push_back(who + ": negative ramp rate");
    if (!(gen.no_load_cost >= 0.0)) issues.push_back(who + ": negative no_load_cost");
    double width = 0.0;
    for (std::size_t k = 0; k < gen.segments.size(); ++k) {
      if (!(gen.segments[k].width >= 0.0)) issues.push_back(who + ": negative segment width");
      if (k > 0 && gen.segments[k].price < gen.segments[k - 1].price) {
        issues.push_back(who + ": non-convex bid curve");
      }
      width += gen.segments[k].width;
    }
    if (std::abs(width - (gen.pmax - gen.pmin)) > 1e-6 * std::max(1.0, gen.pmax)) {
      issues.push_back(who + ": segment widths do not sum to pmax - pmin");
    }
    const auto& caps = gen.reserve_caps;
    if (!(caps.reg >= 0.0) || !(caps.spin >= 0.0) || !(caps.supp_on >= 0.0) || !(caps.supp_off >= 0.0)) {
      issues.push_back(who + ": negative reserve cap");
    }
    const auto& prices = gen.reserve_prices;
    if (!std::isfinite(prices.reg) || !std::isfinite(prices.spin) || !std::isfinite(prices.supp_on) ||
        !std::isfinite(prices.supp_off)) {
      issues.push_back(who + ": non-finite reserve price");
    }
  }

  const std::size_t nbus = case_data.buses.size();
  std::set<std::string> branch_ids;
  out.ptdf_.assign(case_data.branches.size() * nbus, 0.0);
  for (std::size_t e = 0; e < case_data.branches.size(); ++e) {
    const Branch& br = case_data.branches[e];
    const std::string who = "branch '" + br.id + "'";
    if (!branch_ids.insert(br.id).second) issues.push_back("duplicate " + who);
    if (!(br.limit_lo <= br.limit_hi)) issues.push_back(who + ": limit_lo exceeds limit_hi");
    if (!(br.violation_price >= 0.0)) issues.push_back(who + ": negative violation_price");
    for (const auto& [bus_id, coef] : br.ptdf) {
      auto bus = out.bus_lookup_.find(bus_id);
      if (bus == out.bus_lookup_.end()) {
        issues.push_back(who + ": unknown bus '" + bus_id + "'");
        continue;
      }
      if (!(std::abs(coef) <= 1.0 + kPtdfTolerance)) issues.push_back(who + ": |ptdf| exceeds 1");
      out.ptdf_[e * nbus + bus->second] = coef;
    }
  }

  const auto& req = case_data.reserve_req;
  if (any_negative(req.reg.values()) || any_negative(req.rspin.values()) || any_negative(req.op.values())) {
    issues.push_back("reserve_req: negative requirement");
  }
  const auto& pen = case_data.penalties;
  if (!(pen.shortage >= 0.0) || !(pen.surplus >= 0.0) || !(pen.reg >= 0.0) || !(pen.rspin >= 0.0) ||
      !(pen.op >= 0.0)) {
    issues.push_back("penalties: negative price");
  }
  if (!(case_data.step_minutes > 0.0)) issues.push_back("step_minutes must be positive");
  if (!(case_data.base_mva > 0.0)) issues.push_back("base_mva must be positive");

  if (!issues.empty()) throw ValidationError(std::move(issues));
  out.case_ = std::make_shared<const SystemCase>(std::move(case_data));
  return out;
}

double Scenario::total_load(std::size_t period) const {
  double total = 0.0;
  for (double v : load.at(period)) total += v;
  return total;
}

ScenarioSet ScenarioSet::slice(std::size_t first, std::size_t count) const {
  if (first + count > horizon) throw std::out_of_range("ScenarioSet::slice past horizon");
  ScenarioSet out;
  out.horizon = count;
  for (const Scenario& sc : scenarios) {
    Scenario piece;
    piece.name = sc.name;
    piece.prob = sc.prob;
    piece.load.assign(sc.load.begin() + first, sc.load.begin() + first + count);
    for (const auto& [g, series] : sc.pmax_override) {
      piece.pmax_override[g].assign(series.begin() + first, series.begin() + first + count);
    }
    out.scenarios.push_back(std::move(piece));
  }
  return out;
}

void validate_scenarios(const ScenarioSet& set, const ValidatedCase& vcase) {
  std::vector<std::string> issues;
  double total = 0.0;
  for (const Scenario& sc : set.scenarios) {
    const std::string who = "scenario '" + sc.name + "'";
    if (!(sc.prob > 0.0)) issues.push_back(who + ": probability must be positive");
    total += sc.prob;
    if (sc.load.size() != set.horizon) issues.push_back(who + ": load has wrong number of periods");
    for (const auto& row : sc.load) {
      if (row.size() != vcase.num_buses()) issues.push_back(who + ": load row has wrong number of buses");
      if (any_negative(row)) issues.push_back(who + ": negative load");
    }
    for (const auto& [g, series] : sc.pmax_override) {
      if (g >= vcase.num_generators()) {
        issues.push_back(who + ": pmax override for unknown generator");
        continue;
      }
      if (series.size() != set.horizon) issues.push_back(who + ": pmax override has wrong number of periods");
      const double pmin = vcase->generators[g].pmin;
      for (double v : series) {
        if (!(v >= pmin)) issues.push_back(who + ": pmax override below pmin for '" + vcase->generators[g].id + "'");
      }
    }
  }
  if (!set.scenarios.empty() && std::abs(total - 1.0) > kProbabilityTolerance) {
    std::ostringstream msg;
    msg << "probabilities sum to " << total;
    issues.push_back(msg.str());
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

double scenario_pmax(const Scenario& scenario, const Generator& gen, std::size_t g, std::size_t period) {
  auto it = scenario.pmax_override.find(g);
  if (it == scenario.pmax_override.end()) return gen.pmax;
  return it->second.at(period);
}

SystemState SystemState::initial(const ValidatedCase& vcase) {
  SystemState state;
  for (const Generator& gen : vcase->generators) state.prev_dispatch.push_back(gen.initial_output);
  return state;
}

void DispatchSolution::resize(std::size_t generators, std::size_t branches, std::size_t num_periods,
                              std::size_t num_scenarios) {
  num_generators = generators;
  num_branches = branches;
  periods = num_periods;
  probabilities.assign(num_scenarios, num_scenarios ? 1.0 / static_cast<double>(num_scenarios) : 0.0);
  period_weight.assign(num_periods, 1.0);
  gen.assign(num_scenarios * num_periods * generators, {});
  slack.assign(num_scenarios * num_periods, {});
  flow.assign(num_scenarios * num_periods * branches, 0.0);
  flow_violation.assign(num_scenarios * num_periods * branches, 0.0);
}

std::vector<double> DispatchSolution::pg_vector(std::size_t t, std::size_t s) const {
  std::vector<double> out(num_generators);
  for (std::size_t g = 0; g < num_generators; ++g) out[g] = at(g, t, s).pg;
  return out;
}

}  // namespace slad
