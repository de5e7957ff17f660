#pragma once
// Scenario config parsing and result emission. Configs are plain "key =
// value" lines with '#' comments; powers are given in dBm, distances in
// meters, energies in joules. Unknown keys are errors, never ignored.

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "rwpcn/harness.hpp"
#include "rwpcn/model.hpp"

namespace rwpcn {

struct ConfigError : std::runtime_error {
  ConfigError(int line_, const std::string& key_, const std::string& what_)
      : std::runtime_error("config line " + std::to_string(line_) + " (" +
                           key_ + "): " + what_),
        line(line_),
        key(key_) {}
  int line;
  std::string key;
};

struct ParsedScenario {
  SystemParams params;
  ScenarioLayout layout;
  ExperimentSpec spec;
};

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

// Parse a config; omitted keys fall back to the default simulation setup
// (K=4, N=64, P=30 dBm, P_peak=2P, eta=0.8, -174 dBm/Hz, 10 MHz, E^c=1e-7 J,
// path-loss exponent 3, Rician factor 3).
ParsedScenario parse_config(const std::string& text);
ParsedScenario parse_config_file(const std::string& path);

// CSV schema: grid_value,solver,mean_sum_rate,stderr,mean_alpha0,
// mean_wpt_energy,mean_gap,mean_ms. Numeric fields in full-precision
// scientific notation; trailing newline; deterministic bytes.
void emit_result_csv(const ExperimentResult& result, std::ostream& os);
void emit_result_json(const ExperimentResult& result, std::ostream& os);
ExperimentResult read_result_json(std::istream& is);

// Writes in the requested format ("csv" or "json"); throws on I/O failure.
void emit_result(const ExperimentResult& result, const std::string& format,
                 const std::string& path);

SolverId solver_from_name(const std::string& name);

}  // namespace rwpcn
