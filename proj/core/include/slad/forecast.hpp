#pragma once

// Point forecasts and scenario sets: probability-weighted means, nearest
// historical analog days, and history files.

#include <cstddef>
#include <string>
#include <vector>

#include "slad/model.hpp"

namespace slad {

/// Historical days, each stored as a full-day trajectory named by its date.
struct HistoryStore {
  std::size_t period_count = 0;
  std::vector<Scenario> days;

  /// Throws ValidationError if days differ in length or hold negative values.
  static HistoryStore from_days(std::vector<Scenario> days);
};

/// History file: the scenario-file layout with the scenario column holding
/// the date. Probabilities are ignored.
HistoryStore load_history_file(const std::string& path, const ValidatedCase& vcase);
HistoryStore parse_history(std::string_view text, const ValidatedCase& vcase);

/// Single scenario whose trajectories are the probability-weighted mean of
/// the inputs. Throws std::invalid_argument on an empty set.
ScenarioSet mean_forecast(const ScenarioSet& scenarios);

struct KnnOptions {
  std::size_t k = 10;
  /// Periods at the end of the observed prefix used for matching; 0 uses the
  /// whole prefix.
  std::size_t window = 0;
};

struct KnnMatch {
  std::size_t day = 0;
  double distance = 0.0;
};

/// All days ranked by standardized Euclidean distance to the observed prefix,
/// ties going to the earlier day.
std::vector<KnnMatch> knn_rank(const HistoryStore& history, const Scenario& observed_prefix, std::size_t window = 0);

/// The k nearest days as full-day scenarios with uniform probabilities, in
/// distance order. Throws std::invalid_argument if k is 0 or exceeds the
/// history.
ScenarioSet knn_scenarios(const HistoryStore& history, const Scenario& observed_prefix, KnnOptions options = {});

}  // namespace slad
