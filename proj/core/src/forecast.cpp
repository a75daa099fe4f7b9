#include "slad/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "slad/case_io.hpp"

namespace slad {

HistoryStore HistoryStore::from_days(std::vector<Scenario> days) {
  HistoryStore h;
  std::vector<std::string> issues;
  if (!days.empty()) h.period_count = days.front().load.size();
  for (const auto& d : days) {
    if (d.load.size() != h.period_count) issues.push_back("day '" + d.name + "': period count differs");
    for (const auto& row : d.load)
      if (std::any_of(row.begin(), row.end(), [](double v) { return v < 0.0; }))
        issues.push_back("day '" + d.name + "': negative load");
    for (const auto& [g, series] : d.pmax_override)
      if (std::any_of(series.begin(), series.end(), [](double v) { return v < 0.0; }))
        issues.push_back("day '" + d.name + "': negative renewable capacity");
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
  h.days = std::move(days);
  for (auto& d : h.days) d.prob = 1.0;
  return h;
}

HistoryStore parse_history(std::string_view text, const ValidatedCase& vcase) {
  ScenarioSet set = parse_timeseries(text, vcase, {.check_probabilities = false});
  return HistoryStore::from_days(std::move(set.scenarios));
}

HistoryStore load_history_file(const std::string& path, const ValidatedCase& vcase) {
  return parse_history(read_text_file(path), vcase);
}

ScenarioSet mean_forecast(const ScenarioSet& scenarios) {
  if (scenarios.size() == 0) throw std::invalid_argument("mean_forecast: empty scenario set");
  const Scenario& first = scenarios.scenarios.front();
  Scenario mean;
  mean.name = "mean";
  mean.prob = 1.0;
  mean.load.assign(first.load.size(), std::vector<double>(first.load.empty() ? 0 : first.load.front().size(), 0.0));
  for (const auto& [g, series] : first.pmax_override) mean.pmax_override[g].assign(series.size(), 0.0);

  double total = 0.0;
  for (const auto& sc : scenarios.scenarios) total += sc.prob;
  for (const auto& sc : scenarios.scenarios) {
    const double w = sc.prob / total;
    if (sc.load.size() != mean.load.size()) throw std::invalid_argument("mean_forecast: ragged scenarios");
    for (std::size_t t = 0; t < sc.load.size(); ++t)
      for (std::size_t i = 0; i < sc.load[t].size(); ++i) mean.load[t][i] += w * sc.load[t][i];
    if (sc.pmax_override.size() != mean.pmax_override.size())
      throw std::invalid_argument("mean_forecast: scenarios override different generators");
    for (const auto& [g, series] : sc.pmax_override) {
      auto it = mean.pmax_override.find(g);
      if (it == mean.pmax_override.end()) throw std::invalid_argument("mean_forecast: scenarios override different generators");
      for (std::size_t t = 0; t < series.size(); ++t) it->second[t] += w * series[t];
    }
  }
  ScenarioSet out;
  out.horizon = scenarios.horizon;
  out.scenarios.push_back(std::move(mean));
  return out;
}

namespace {

// Channels are every bus load followed by every renewable override.
struct Channels {
  std::vector<std::size_t> overrides;  // generator indices
  std::size_t buses = 0;

  std::size_t size() const { return buses + overrides.size(); }
  double value(const Scenario& sc, std::size_t c, std::size_t t) const {
    if (c < buses) return sc.load.at(t).at(c);
    return sc.pmax_override.at(overrides[c - buses]).at(t);
  }
};

}  // namespace

std::vector<KnnMatch> knn_rank(const HistoryStore& history, const Scenario& prefix, std::size_t window) {
  const std::size_t L = prefix.load.size();
  if (L == 0) throw std::invalid_argument("knn: observed prefix is empty");
  if (L > history.period_count) throw std::invalid_argument("knn: observed prefix is longer than a day");
  if (history.days.empty()) return {};
  const std::size_t from = (window == 0 || window >= L) ? 0 : L - window;

  Channels ch;
  ch.buses = prefix.load.front().size();
  for (const auto& [g, series] : history.days.front().pmax_override)
    if (prefix.pmax_override.count(g)) ch.overrides.push_back(g);

  // Standard deviation of each channel over all days and periods.
  std::vector<double> scale(ch.size(), 1.0);
  for (std::size_t c = 0; c < ch.size(); ++c) {
    double sum = 0.0, sq = 0.0, n = 0.0;
    for (const auto& d : history.days)
      for (std::size_t t = 0; t < history.period_count; ++t) {
        const double v = ch.value(d, c, t);
        sum += v;
        sq += v * v;
        n += 1.0;
      }
    const double mean = sum / n;
    const double var = std::max(0.0, sq / n - mean * mean);
    if (var > 1e-18) scale[c] = std::sqrt(var);
  }

  std::vector<KnnMatch> ranked;
  for (std::size_t d = 0; d < history.days.size(); ++d) {
    double dist2 = 0.0;
    for (std::size_t t = from; t < L; ++t)
      for (std::size_t c = 0; c < ch.size(); ++c) {
        const double diff = (ch.value(history.days[d], c, t) - ch.value(prefix, c, t)) / scale[c];
        dist2 += diff * diff;
      }
    ranked.push_back({d, std::sqrt(dist2)});
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const KnnMatch& a, const KnnMatch& b) { return a.distance < b.distance; });
  return ranked;
}

ScenarioSet knn_scenarios(const HistoryStore& history, const Scenario& prefix, KnnOptions options) {
  if (options.k == 0) throw std::invalid_argument("knn: k must be positive");
  if (options.k > history.days.size())
    throw std::invalid_argument("knn: k = " + std::to_string(options.k) + " exceeds the " +
                                std::to_string(history.days.size()) + " historical days");
  const auto ranked = knn_rank(history, prefix, options.window);
  ScenarioSet out;
  out.horizon = history.period_count;
  for (std::size_t j = 0; j < options.k; ++j) {
    Scenario sc = history.days[ranked[j].day];
    sc.prob = 1.0 / static_cast<double>(options.k);
    out.scenarios.push_back(std::move(sc));
  }
  return out;
}

}  // namespace slad
