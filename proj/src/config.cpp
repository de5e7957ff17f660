#include "rwpcn/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <json.hpp>

namespace rwpcn {

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

struct KeyValue {
  std::string value;
  int line;
};

double parse_double(const KeyValue& kv, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(kv.value, &pos);
    if (pos != kv.value.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(kv.line, key, "cannot parse '" + kv.value + "' as number");
  }
}

long parse_int(const KeyValue& kv, const std::string& key) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(kv.value, &pos);
    if (pos != kv.value.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(kv.line, key,
                      "cannot parse '" + kv.value + "' as integer");
  }
}

ExperimentKind kind_from_name(const std::string& name, int line) {
  if (name == "power-sweep") return ExperimentKind::PowerSweep;
  if (name == "gap-vs-N" || name == "gap-vs-n") return ExperimentKind::GapVsN;
  if (name == "relay-position-sweep") return ExperimentKind::RelayPosition;
  if (name == "pairs-sweep") return ExperimentKind::PairsSweep;
  if (name == "peak-sweep") return ExperimentKind::PeakSweep;
  throw ConfigError(line, "experiment", "unknown experiment kind '" + name + "'");
}

}  // namespace

SolverId solver_from_name(const std::string& name) {
  for (const SolverId id :
       {SolverId::TdmaOptimal, SolverId::TdmaSuboptimal, SolverId::TdmaEea,
        SolverId::TdmaEra, SolverId::FdmaOptimal, SolverId::FdmaSuboptimal,
        SolverId::FdmaEea, SolverId::FdmaFsa})
    if (name == solver_name(id)) return id;
  throw std::invalid_argument("unknown solver '" + name + "'");
}

ParsedScenario parse_config(const std::string& text) {
  std::map<std::string, KeyValue> kv;
  {
    std::stringstream ss(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(ss, raw)) {
      ++line_no;
      const auto hash = raw.find('#');
      if (hash != std::string::npos) raw = raw.substr(0, hash);
      const std::string line = trim(raw);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError(line_no, line, "expected 'key = value'");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty() || value.empty())
        throw ConfigError(line_no, key, "expected 'key = value'");
      kv[key] = {value, line_no};
    }
  }

  ParsedScenario out;
  out.params = default_params();
  out.spec.kind = ExperimentKind::PowerSweep;
  out.spec.grid = {20, 25, 30, 35, 40};
  out.spec.solvers = {SolverId::TdmaOptimal, SolverId::TdmaSuboptimal};

  auto take = [&](const char* key) -> std::optional<KeyValue> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    KeyValue v = it->second;
    kv.erase(it);
    return v;
  };

  std::optional<double> p_dbm, peak_dbm;
  if (auto v = take("P_dbm")) p_dbm = parse_double(*v, "P_dbm");
  if (auto v = take("P_peak_dbm")) peak_dbm = parse_double(*v, "P_peak_dbm");
  if (auto v = take("peak_ratio"))
    out.spec.peak_ratio = parse_double(*v, "peak_ratio");
  if (auto v = take("K")) out.params.num_pairs = parse_int(*v, "K");
  if (auto v = take("N")) out.params.num_subcarriers = parse_int(*v, "N");
  if (auto v = take("eta"))
    out.params.conversion_efficiency = parse_double(*v, "eta");
  if (auto v = take("noise_dbm_per_hz"))
    out.params.noise_density =
        dbm_to_watts(parse_double(*v, "noise_dbm_per_hz"));
  if (auto v = take("bandwidth_hz"))
    out.params.bandwidth = parse_double(*v, "bandwidth_hz");
  std::optional<KeyValue> cost_kv = take("processing_cost_j");
  if (auto v = take("block_duration"))
    out.params.block_duration = parse_double(*v, "block_duration");

  if (auto v = take("relay_x")) out.layout.relay_position.x = parse_double(*v, "relay_x");
  if (auto v = take("relay_y")) out.layout.relay_position.y = parse_double(*v, "relay_y");
  if (auto v = take("source_center_x"))
    out.layout.source_center.x = parse_double(*v, "source_center_x");
  if (auto v = take("source_center_y"))
    out.layout.source_center.y = parse_double(*v, "source_center_y");
  if (auto v = take("dest_center_x"))
    out.layout.dest_center.x = parse_double(*v, "dest_center_x");
  if (auto v = take("dest_center_y"))
    out.layout.dest_center.y = parse_double(*v, "dest_center_y");
  if (auto v = take("region_side_m"))
    out.layout.region_side = parse_double(*v, "region_side_m");
  if (auto v = take("pathloss_exponent"))
    out.layout.pathloss_exponent = parse_double(*v, "pathloss_exponent");
  if (auto v = take("rician_factor"))
    out.layout.rician_factor = parse_double(*v, "rician_factor");

  if (auto v = take("experiment"))
    out.spec.kind = kind_from_name(v->value, v->line);
  if (auto v = take("grid")) {
    out.spec.grid.clear();
    for (const auto& item : split(v->value, ','))
      out.spec.grid.push_back(parse_double({item, v->line}, "grid"));
    if (out.spec.grid.empty())
      throw ConfigError(v->line, "grid", "grid is empty");
  }
  if (auto v = take("realizations"))
    out.spec.realizations = parse_int(*v, "realizations");
  if (auto v = take("seed")) out.spec.base_seed = parse_int(*v, "seed");
  if (auto v = take("threads")) out.spec.num_threads = parse_int(*v, "threads");
  if (auto v = take("record_timing"))
    out.spec.record_timing = parse_int(*v, "record_timing") != 0;
  if (auto v = take("solvers")) {
    out.spec.solvers.clear();
    for (const auto& name : split(v->value, ',')) {
      try {
        out.spec.solvers.push_back(solver_from_name(name));
      } catch (const std::exception& e) {
        throw ConfigError(v->line, "solvers", e.what());
      }
    }
  }

  if (!kv.empty()) {
    const auto& first = *kv.begin();
    throw ConfigError(first.second.line, first.first, "unknown key");
  }

  // Resolve powers: defaults P = 30 dBm, P_peak = ratio * P.
  out.params.total_energy = dbm_to_watts(p_dbm.value_or(30.0));
  out.params.peak_power = peak_dbm ? dbm_to_watts(*peak_dbm)
                                   : out.spec.peak_ratio * out.params.total_energy;
  if (cost_kv) {
    const auto items = split(cost_kv->value, ',');
    std::vector<double> costs;
    for (const auto& item : items)
      costs.push_back(parse_double({item, cost_kv->line}, "processing_cost_j"));
    if (costs.size() == 1)
      out.params.processing_cost.assign(out.params.num_pairs, costs[0]);
    else
      out.params.processing_cost = costs;
  } else {
    out.params.processing_cost.assign(out.params.num_pairs, 1e-7);
  }

  try {
    out.params.validate();
    out.spec.validate();
  } catch (const std::exception& e) {
    throw ConfigError(0, "(validation)", e.what());
  }
  return out;
}

ParsedScenario parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, path, "cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

namespace {

std::string fmt_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17e", v);
  return buf;
}

}  // namespace

void emit_result_csv(const ExperimentResult& result, std::ostream& os) {
  os << "grid_value,solver,mean_sum_rate,stderr,mean_alpha0,mean_wpt_energy,"
        "mean_gap,mean_ms\n";
  for (std::size_t gi = 0; gi < result.grid.size(); ++gi)
    for (std::size_t si = 0; si < result.solvers.size(); ++si) {
      const auto& c = result.cells[gi][si];
      os << fmt_full(result.grid[gi]) << ',' << solver_name(result.solvers[si])
         << ',' << fmt_full(c.mean_sum_rate) << ','
         << fmt_full(c.stderr_sum_rate) << ',' << fmt_full(c.mean_alpha0)
         << ',' << fmt_full(c.mean_wpt_energy) << ',' << fmt_full(c.mean_gap)
         << ',' << fmt_full(c.mean_ms) << '\n';
    }
}

void emit_result_json(const ExperimentResult& result, std::ostream& os) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t gi = 0; gi < result.grid.size(); ++gi)
    for (std::size_t si = 0; si < result.solvers.size(); ++si) {
      const auto& c = result.cells[gi][si];
      rows.push_back({{"grid_value", result.grid[gi]},
                      {"solver", solver_name(result.solvers[si])},
                      {"mean_sum_rate", c.mean_sum_rate},
                      {"stderr", c.stderr_sum_rate},
                      {"mean_alpha0", c.mean_alpha0},
                      {"mean_wpt_energy", c.mean_wpt_energy},
                      {"mean_gap", c.mean_gap},
                      {"mean_ms", c.mean_ms},
                      {"failures", c.failures}});
    }
  nlohmann::json doc;
  doc["rows"] = rows;
  doc["errors"] = result.errors;
  os << doc.dump(2) << '\n';
}

ExperimentResult read_result_json(std::istream& is) {
  nlohmann::json doc = nlohmann::json::parse(is);
  ExperimentResult result;
  // Rebuild the grid/solver axes from the row list (rows are grid-major).
  for (const auto& row : doc.at("rows")) {
    const double g = row.at("grid_value").get<double>();
    const SolverId s = solver_from_name(row.at("solver").get<std::string>());
    if (result.grid.empty() || result.grid.back() != g) {
      if (std::find(result.grid.begin(), result.grid.end(), g) ==
          result.grid.end())
        result.grid.push_back(g);
    }
    if (std::find(result.solvers.begin(), result.solvers.end(), s) ==
        result.solvers.end())
      result.solvers.push_back(s);
  }
  result.cells.assign(result.grid.size(),
                      std::vector<CellStats>(result.solvers.size()));
  std::size_t gi = 0, si = 0;
  for (const auto& row : doc.at("rows")) {
    CellStats c;
    c.mean_sum_rate = row.at("mean_sum_rate").get<double>();
    c.stderr_sum_rate = row.at("stderr").get<double>();
    c.mean_alpha0 = row.at("mean_alpha0").get<double>();
    c.mean_wpt_energy = row.at("mean_wpt_energy").get<double>();
    c.mean_gap = row.at("mean_gap").get<double>();
    c.mean_ms = row.at("mean_ms").get<double>();
    c.failures = row.at("failures").get<int>();
    result.cells[gi][si] = c;
    if (++si == result.solvers.size()) {
      si = 0;
      ++gi;
    }
  }
  for (const auto& e : doc.at("errors")) result.errors.push_back(e);
  return result;
}

void emit_result(const ExperimentResult& result, const std::string& format,
                 const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open output file: " + path);
  if (format == "csv")
    emit_result_csv(result, os);
  else if (format == "json")
    emit_result_json(result, os);
  else
    throw std::invalid_argument("unknown output format: " + format);
  os.flush();
  if (!os) throw std::runtime_error("failed writing output file: " + path);
}

}  // namespace rwpcn
