#pragma once

// Text formats for cases (JSON document) and load/renewable time series
// (comma-separated table with header `period,scenario,prob,load:<bus>...,pmax:<gen>...`).

#include <string>
#include <string_view>

#include "slad/model.hpp"

namespace slad {

/// Parses a case document. Missing optional fields take their defaults
/// (step_minutes=5, monitored=true, ...). Throws ParseError naming the
/// offending path, or ValidationError for duplicate ids / unknown buses.
SystemCase parse_case(std::string_view text);

/// Inverse of parse_case; infinite values are written as "inf" / "-inf".
std::string serialize_case(const SystemCase& case_data);

SystemCase load_case_file(const std::string& path);

struct TimeseriesOptions {
  /// When false, probabilities are neither required nor checked (history files).
  bool check_probabilities = true;
};

/// Parses a time-series table against a case. The `scenario` and `prob`
/// columns are optional; without them the file is one scenario with prob 1.
/// Scenario order follows first appearance in the file.
ScenarioSet parse_timeseries(std::string_view text, const ValidatedCase& vcase, TimeseriesOptions options = {});

std::string serialize_timeseries(const ScenarioSet& set, const ValidatedCase& vcase);

ScenarioSet load_timeseries_file(const std::string& path, const ValidatedCase& vcase,
                                 TimeseriesOptions options = {});

std::string read_text_file(const std::string& path);

}  // namespace slad
