#include "slad/case_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace slad {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {}

  const json& node() const { return node_; }
  const std::string& path() const { return path_; }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(path_, msg); }

  void expect_object(std::initializer_list<std::string_view> allowed) const {
    if (!node_.is_object()) fail("expected object");
    for (const auto& [key, value] : node_.items()) {
      bool known = false;
      for (auto a : allowed) known = known || key == a;
      if (!known) throw ParseError(path_ + "." + key, "unknown field");
    }
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  Reader child(const std::string& key) const {
    if (!node_.is_object()) fail("expected object");
    if (!node_.contains(key)) throw ParseError(path_ + "." + key, "missing required field");
    return Reader(node_.at(key), path_ + "." + key);
  }
  Reader element(std::size_t i) const {
    return Reader(node_.at(i), path_ + "[" + std::to_string(i) + "]");
  }

  double number() const {
    if (node_.is_number()) return node_.get<double>();
    if (node_.is_string()) {
      const auto s = node_.get<std::string>();
      if (s == "inf" || s == "+inf" || s == "infinity") return kInfinity;
      if (s == "-inf" || s == "-infinity") return -kInfinity;
    }
    fail("expected number");
  }

  std::string string() const {
    if (!node_.is_string()) fail("expected string");
    return node_.get<std::string>();
  }

  bool boolean() const {
    if (!node_.is_boolean()) fail("expected boolean");
    return node_.get<bool>();
  }

  std::size_t array_size() const {
    if (!node_.is_array()) fail("expected array");
    return node_.size();
  }

  double number_or(const std::string& key, double fallback) const { return has(key) ? child(key).number() : fallback; }
  bool boolean_or(const std::string& key, bool fallback) const { return has(key) ? child(key).boolean() : fallback; }

  template <typename T, typename F>
  PeriodSeries<T> series(F scalar) const {
    if (node_.is_array()) {
      if (node_.empty()) fail("expected non-empty array");
      std::vector<T> values;
      for (std::size_t i = 0; i < node_.size(); ++i) values.push_back(scalar(element(i)));
      return PeriodSeries<T>(std::move(values));
    }
    return PeriodSeries<T>(scalar(*this));
  }

 private:
  const json& node_;
  std::string path_;
};

ReserveProducts read_products(const Reader& r, ReserveProducts defaults) {
  r.expect_object({"reg", "spin", "supp_on", "supp_off"});
  return {r.number_or("reg", defaults.reg), r.number_or("spin", defaults.spin),
          r.number_or("supp_on", defaults.supp_on), r.number_or("supp_off", defaults.supp_off)};
}

PeriodSeries<bool> read_flag(const Reader& parent, const std::string& key) {
  if (!parent.has(key)) return PeriodSeries<bool>(true);
  return parent.child(key).series<bool>([](const Reader& r) { return r.boolean(); });
}

PeriodSeries<double> read_requirement(const Reader& parent, const std::string& key) {
  if (!parent.has(key)) return PeriodSeries<double>(0.0);
  return parent.child(key).series<double>([](const Reader& r) { return r.number(); });
}

Generator read_generator(const Reader& r) {
  r.expect_object({"id", "bus", "pmin", "pmax", "initial_output", "ramp_up", "ramp_down", "segments",
                   "no_load_cost", "reserve_caps", "reserve_prices", "flags", "is_import"});
  Generator gen;
  gen.id = r.child("id").string();
  gen.bus = r.child("bus").string();
  gen.pmin = r.number_or("pmin", 0.0);
  gen.pmax = r.child("pmax").number();
  gen.initial_output = r.number_or("initial_output", 0.0);
  gen.ramp_up = r.child("ramp_up").number();
  gen.ramp_down = r.number_or("ramp_down", gen.ramp_up);
  if (r.has("segments")) {
    Reader segs = r.child("segments");
    for (std::size_t k = 0; k < segs.array_size(); ++k) {
      Reader seg = segs.element(k);
      seg.expect_object({"width", "price"});
      gen.segments.push_back({seg.child("width").number(), seg.child("price").number()});
    }
  }
  gen.no_load_cost = r.number_or("no_load_cost", 0.0);
  if (r.has("reserve_caps")) gen.reserve_caps = read_products(r.child("reserve_caps"), gen.reserve_caps);
  if (r.has("reserve_prices")) gen.reserve_prices = read_products(r.child("reserve_prices"), gen.reserve_prices);
  if (r.has("flags")) {
    Reader f = r.child("flags");
    f.expect_object({"commit", "regulation", "ra_reg", "ra_spin", "ra_s_on", "ra_s_off"});
    gen.flags.commit = read_flag(f, "commit");
    gen.flags.regulation = read_flag(f, "regulation");
    gen.flags.ra_reg = read_flag(f, "ra_reg");
    gen.flags.ra_spin = read_flag(f, "ra_spin");
    gen.flags.ra_s_on = read_flag(f, "ra_s_on");
    gen.flags.ra_s_off = read_flag(f, "ra_s_off");
  }
  gen.is_import = r.boolean_or("is_import", false);
  return gen;
}

Branch read_branch(const Reader& r) {
  r.expect_object({"id", "ptdf", "limit_lo", "limit_hi", "violation_price", "monitored"});
  Branch br;
  br.id = r.child("id").string();
  Reader ptdf = r.child("ptdf");
  if (!ptdf.node().is_object()) ptdf.fail("expected object");
  for (const auto& [bus, coef] : ptdf.node().items()) {
    br.ptdf[bus] = Reader(coef, ptdf.path() + "." + bus).number();
  }
  br.limit_lo = r.number_or("limit_lo", -kInfinity);
  br.limit_hi = r.number_or("limit_hi", kInfinity);
  br.violation_price = r.number_or("violation_price", br.violation_price);
  br.monitored = r.boolean_or("monitored", true);
  return br;
}

ordered_json number_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

template <typename T>
ordered_json series_json(const PeriodSeries<T>& s) {
  if (s.values().size() == 1) {
    if constexpr (std::is_same_v<T, double>) return number_json(s.values().front());
    else return static_cast<bool>(s.values().front());
  }
  ordered_json arr = ordered_json::array();
  for (const auto& v : s.values()) {
    if constexpr (std::is_same_v<T, double>) arr.push_back(number_json(v));
    else arr.push_back(static_cast<bool>(v));
  }
  return arr;
}

ordered_json products_json(const ReserveProducts& p) {
  ordered_json j;
  j["reg"] = number_json(p.reg);
  j["spin"] = number_json(p.spin);
  j["supp_on"] = number_json(p.supp_on);
  j["supp_off"] = number_json(p.supp_off);
  return j;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(delim, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view field, const std::string& where) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw ParseError(where, "expected number, got '" + std::string(field) + "'");
  }
  return value;
}

std::string format_double(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

SystemCase parse_case(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("$", std::string("malformed document: ") + e.what());
  }
  Reader root(doc, "$");
  root.expect_object({"schema_version", "name", "buses", "generators", "branches", "reserve_req", "penalties",
                      "step_minutes", "base_mva", "cost_basis"});
  SystemCase out;

  if (root.has("buses")) {
    Reader buses = root.child("buses");
    for (std::size_t i = 0; i < buses.array_size(); ++i) {
      Reader bus = buses.element(i);
      bus.expect_object({"id"});
      out.buses.push_back({bus.child("id").string()});
    }
  }
  if (root.has("generators")) {
    Reader gens = root.child("generators");
    for (std::size_t i = 0; i < gens.array_size(); ++i) out.generators.push_back(read_generator(gens.element(i)));
  }
  if (root.has("branches")) {
    Reader branches = root.child("branches");
    for (std::size_t i = 0; i < branches.array_size(); ++i) out.branches.push_back(read_branch(branches.element(i)));
  }
  if (root.has("reserve_req")) {
    Reader req = root.child("reserve_req");
    req.expect_object({"reg", "rspin", "op"});
    out.reserve_req.reg = read_requirement(req, "reg");
    out.reserve_req.rspin = read_requirement(req, "rspin");
    out.reserve_req.op = read_requirement(req, "op");
  }
  if (root.has("penalties")) {
    Reader pen = root.child("penalties");
    pen.expect_object({"shortage", "surplus", "reg", "rspin", "op"});
    out.penalties.shortage = pen.number_or("shortage", out.penalties.shortage);
    // Surplus defaults to the shortage price unless given.
    out.penalties.surplus = pen.number_or("surplus", out.penalties.shortage);
    out.penalties.reg = pen.number_or("reg", out.penalties.reg);
    out.penalties.rspin = pen.number_or("rspin", out.penalties.rspin);
    out.penalties.op = pen.number_or("op", out.penalties.op);
  }
  out.step_minutes = root.number_or("step_minutes", 5.0);
  out.base_mva = root.number_or("base_mva", 100.0);
  if (root.has("cost_basis")) {
    const auto basis = root.child("cost_basis").string();
    if (basis == "per_hour") out.cost_basis = CostBasis::kPerHour;
    else if (basis == "per_period") out.cost_basis = CostBasis::kPerPeriod;
    else root.child("cost_basis").fail("expected \"per_hour\" or \"per_period\"");
  }

  // Referential checks; numeric invariants are left to validate_case.
  std::vector<std::string> issues;
  std::set<std::string> bus_ids, gen_ids, branch_ids;
  for (const auto& bus : out.buses) {
    if (!bus_ids.insert(bus.id).second) issues.push_back("duplicate bus id '" + bus.id + "'");
  }
  for (const auto& gen : out.generators) {
    if (!gen_ids.insert(gen.id).second) issues.push_back("duplicate generator id '" + gen.id + "'");
    if (!bus_ids.count(gen.bus)) issues.push_back("generator '" + gen.id + "': unknown bus '" + gen.bus + "'");
  }
  for (const auto& br : out.branches) {
    if (!branch_ids.insert(br.id).second) issues.push_back("duplicate branch id '" + br.id + "'");
    for (const auto& [bus, coef] : br.ptdf) {
      if (!bus_ids.count(bus)) issues.push_back("branch '" + br.id + "': unknown bus '" + bus + "'");
    }
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return out;
}

std::string serialize_case(const SystemCase& c) {
  ordered_json doc;
  doc["schema_version"] = 1;
  doc["buses"] = ordered_json::array();
  for (const auto& bus : c.buses) doc["buses"].push_back({{"id", bus.id}});
  doc["generators"] = ordered_json::array();
  for (const auto& g : c.generators) {
    ordered_json j;
    j["id"] = g.id;
    j["bus"] = g.bus;
    j["pmin"] = number_json(g.pmin);
    j["pmax"] = number_json(g.pmax);
    j["initial_output"] = number_json(g.initial_output);
    j["ramp_up"] = number_json(g.ramp_up);
    j["ramp_down"] = number_json(g.ramp_down);
    j["segments"] = ordered_json::array();
    for (const auto& seg : g.segments) {
      j["segments"].push_back({{"width", number_json(seg.width)}, {"price", number_json(seg.price)}});
    }
    j["no_load_cost"] = number_json(g.no_load_cost);
    j["reserve_caps"] = products_json(g.reserve_caps);
    j["reserve_prices"] = products_json(g.reserve_prices);
    ordered_json flags;
    flags["commit"] = series_json(g.flags.commit);
    flags["regulation"] = series_json(g.flags.regulation);
    flags["ra_reg"] = series_json(g.flags.ra_reg);
    flags["ra_spin"] = series_json(g.flags.ra_spin);
    flags["ra_s_on"] = series_json(g.flags.ra_s_on);
    flags["ra_s_off"] = series_json(g.flags.ra_s_off);
    j["flags"] = flags;
    j["is_import"] = g.is_import;
    doc["generators"].push_back(j);
  }
  doc["branches"] = ordered_json::array();
  for (const auto& br : c.branches) {
    ordered_json j;
    j["id"] = br.id;
    ordered_json ptdf = ordered_json::object();
    for (const auto& [bus, coef] : br.ptdf) ptdf[bus] = number_json(coef);
    j["ptdf"] = ptdf;
    j["limit_lo"] = number_json(br.limit_lo);
    j["limit_hi"] = number_json(br.limit_hi);
    j["violation_price"] = number_json(br.violation_price);
    j["monitored"] = br.monitored;
    doc["branches"].push_back(j);
  }
  doc["reserve_req"] = {{"reg", series_json(c.reserve_req.reg)},
                        {"rspin", series_json(c.reserve_req.rspin)},
                        {"op", series_json(c.reserve_req.op)}};
  doc["penalties"] = {{"shortage", number_json(c.penalties.shortage)},
                      {"surplus", number_json(c.penalties.surplus)},
                      {"reg", number_json(c.penalties.reg)},
                      {"rspin", number_json(c.penalties.rspin)},
                      {"op", number_json(c.penalties.op)}};
  doc["step_minutes"] = number_json(c.step_minutes);
  doc["base_mva"] = number_json(c.base_mva);
  doc["cost_basis"] = c.cost_basis == CostBasis::kPerHour ? "per_hour" : "per_period";
  return doc.dump(2) + "\n";
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

SystemCase load_case_file(const std::string& path) { return parse_case(read_text_file(path)); }

ScenarioSet parse_timeseries(std::string_view text, const ValidatedCase& vcase, TimeseriesOptions options) {
  enum class Kind { kPeriod, kScenario, kProb, kLoad, kPmax };
  struct Column {
    Kind kind;
    std::size_t index = 0;
  };

  std::vector<Column> columns;
  bool have_period = false, have_scenario = false, have_prob = false;
  std::size_t line_no = 0;

  struct Row {
    long period;
    std::vector<double> load;
    std::map<std::size_t, double> pmax;
  };
  struct Block {
    std::string name;
    double prob = 1.0;
    bool prob_set = false;
    std::vector<Row> rows;
  };
  std::vector<Block> blocks;
  std::map<std::string, std::size_t> block_lookup;
  std::set<std::size_t> pmax_columns;

  std::size_t pos = 0;
  bool header_done = false;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    std::string_view line = trim(text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos));
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const std::string where = "line " + std::to_string(line_no);
    auto fields = split(line, ',');

    if (!header_done) {
      header_done = true;
      for (auto raw : fields) {
        auto name = trim(raw);
        if (name == "period") {
          columns.push_back({Kind::kPeriod});
          have_period = true;
        } else if (name == "scenario") {
          columns.push_back({Kind::kScenario});
          have_scenario = true;
        } else if (name == "prob") {
          columns.push_back({Kind::kProb});
          have_prob = true;
        } else if (name.substr(0, 5) == "load:") {
          auto bus = vcase.bus_index(std::string(name.substr(5)));
          if (!bus) throw ParseError(where, "unknown bus '" + std::string(name.substr(5)) + "'");
          columns.push_back({Kind::kLoad, *bus});
        } else if (name.substr(0, 5) == "pmax:") {
          auto gen = vcase.generator_index(std::string(name.substr(5)));
          if (!gen) throw ParseError(where, "unknown generator '" + std::string(name.substr(5)) + "'");
          columns.push_back({Kind::kPmax, *gen});
          pmax_columns.insert(*gen);
        } else {
          throw ParseError(where, "unknown column '" + std::string(name) + "'");
        }
      }
      if (!have_period) throw ParseError(where, "missing 'period' column");
      continue;
    }

    if (fields.size() != columns.size()) {
      throw ParseError(where, "expected " + std::to_string(columns.size()) + " fields, got " +
                                  std::to_string(fields.size()));
    }
    Row row{0, std::vector<double>(vcase.num_buses(), 0.0), {}};
    std::string scenario = "0";
    std::optional<double> prob;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      auto field = trim(fields[c]);
      switch (columns[c].kind) {
        case Kind::kPeriod: {
          double p = parse_double(field, where);
          if (p != std::floor(p)) throw ParseError(where, "period must be an integer");
          row.period = static_cast<long>(p);
          break;
        }
        case Kind::kScenario:
          scenario = std::string(field);
          break;
        case Kind::kProb:
          if (!field.empty()) prob = parse_double(field, where);
          break;
        case Kind::kLoad:
          row.load[columns[c].index] = parse_double(field, where);
          break;
        case Kind::kPmax:
          row.pmax[columns[c].index] = parse_double(field, where);
          break;
      }
    }
    auto [it, inserted] = block_lookup.emplace(scenario, blocks.size());
    if (inserted) blocks.push_back({scenario, 1.0, false, {}});
    Block& block = blocks[it->second];
    if (prob) {
      if (block.prob_set && block.prob != *prob) {
        throw ParseError(where, "inconsistent probability for scenario '" + scenario + "'");
      }
      block.prob = *prob;
      block.prob_set = true;
    }
    block.rows.push_back(std::move(row));
  }
  (void)have_scenario;

  ScenarioSet out;
  if (blocks.empty()) return out;
  std::vector<long> reference_periods;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    Block& block = blocks[b];
    std::stable_sort(block.rows.begin(), block.rows.end(),
                     [](const Row& a, const Row& b2) { return a.period < b2.period; });
    std::vector<long> periods;
    for (const auto& r : block.rows) periods.push_back(r.period);
    for (std::size_t i = 1; i < periods.size(); ++i) {
      if (periods[i] != periods[i - 1] + 1) {
        throw ParseError("scenario '" + block.name + "'", "ragged periods (missing or repeated period)");
      }
    }
    if (b == 0) {
      reference_periods = periods;
    } else if (periods != reference_periods) {
      throw ParseError("scenario '" + block.name + "'", "ragged periods (differs from first scenario)");
    }
    if (!have_prob && blocks.size() > 1) block.prob = 1.0 / static_cast<double>(blocks.size());

    Scenario sc;
    sc.name = block.name;
    sc.prob = block.prob;
    for (auto& r : block.rows) sc.load.push_back(std::move(r.load));
    for (std::size_t g : pmax_columns) {
      auto& series = sc.pmax_override[g];
      for (const auto& r : block.rows) series.push_back(r.pmax.at(g));
    }
    out.scenarios.push_back(std::move(sc));
  }
  out.horizon = reference_periods.size();

  if (options.check_probabilities) {
    validate_scenarios(out, vcase);
  } else {
    for (auto& sc : out.scenarios) sc.prob = 1.0 / static_cast<double>(out.scenarios.size());
  }
  return out;
}

std::string serialize_timeseries(const ScenarioSet& set, const ValidatedCase& vcase) {
  std::set<std::size_t> pmax_gens;
  for (const auto& sc : set.scenarios) {
    for (const auto& [g, series] : sc.pmax_override) pmax_gens.insert(g);
  }
  std::ostringstream out;
  out << "period,scenario,prob";
  for (const auto& bus : vcase->buses) out << ",load:" << bus.id;
  for (std::size_t g : pmax_gens) out << ",pmax:" << vcase->generators[g].id;
  out << "\n";
  for (const auto& sc : set.scenarios) {
    for (std::size_t t = 0; t < set.horizon; ++t) {
      out << (t + 1) << "," << sc.name << "," << format_double(sc.prob);
      for (double v : sc.load[t]) out << "," << format_double(v);
      for (std::size_t g : pmax_gens) {
        auto it = sc.pmax_override.find(g);
        out << "," << format_double(it == sc.pmax_override.end() ? vcase->generators[g].pmax : it->second[t]);
      }
      out << "\n";
    }
  }
  return out.str();
}

ScenarioSet load_timeseries_file(const std::string& path, const ValidatedCase& vcase, TimeseriesOptions options) {
  return parse_timeseries(read_text_file(path), vcase, options);
}

}  // namespace slad
