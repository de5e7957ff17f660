#pragma once
// Monte-Carlo experiment engine: sweeps one scenario knob over a grid, solves
// seeded channel realizations with the requested solvers, and aggregates
// per-cell statistics. Realizations run on a small thread pool; reduction is
// index-ordered so results are bit-reproducible.

#include <cstdint>
#include <string>
#include <vector>

#include "rwpcn/fdma.hpp"
#include "rwpcn/model.hpp"
#include "rwpcn/tdma.hpp"

namespace rwpcn {

enum class ExperimentKind {
  PowerSweep,     // grid: P in dBm, P_peak = peak_ratio * P
  GapVsN,         // grid: number of subcarriers (FDMA optimal only)
  RelayPosition,  // grid: relay x coordinate in meters
  PairsSweep,     // grid: number of pairs K
  PeakSweep,      // grid: P_peak in dBm at fixed P
};

enum class SolverId {
  TdmaOptimal,
  TdmaSuboptimal,
  TdmaEea,
  TdmaEra,
  FdmaOptimal,
  FdmaSuboptimal,
  FdmaEea,
  FdmaFsa,
};

const char* solver_name(SolverId id);
bool solver_is_fdma(SolverId id);

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::PowerSweep;
  std::vector<double> grid;
  int realizations = 100;
  std::uint64_t base_seed = 1;
  std::vector<SolverId> solvers;
  double peak_ratio = 2.0;  // P_peak = ratio * P when not swept explicitly
  bool record_timing = true;
  int num_threads = 0;  // 0: hardware concurrency

  void validate() const;
};

struct CellStats {
  double mean_sum_rate = 0.0;
  double stderr_sum_rate = 0.0;
  double mean_alpha0 = 0.0;
  double mean_wpt_energy = 0.0;
  double mean_gap = 0.0;
  double mean_ms = 0.0;
  int failures = 0;
};

struct ExperimentResult {
  std::vector<double> grid;
  std::vector<SolverId> solvers;
  std::vector<std::vector<CellStats>> cells;  // [grid][solver]
  std::vector<std::string> errors;            // recorded per-instance failures

  bool operator==(const ExperimentResult&) const = default;
};

bool operator==(const CellStats& a, const CellStats& b);

// Seed for (grid point, realization): base + g*1e6 + r.
std::uint64_t realization_seed(std::uint64_t base, int grid_index,
                               int realization);

ExperimentResult run_experiment(const ExperimentSpec& spec,
                                const SystemParams& params,
                                const ScenarioLayout& layout);

struct GapRow {
  int num_subcarriers = 0;
  double mean_gap = 0.0;
};

struct GapTable {
  std::vector<GapRow> rows;
  bool monotone_nonincreasing = true;
};

GapTable measure_duality_gap(const SystemParams& params,
                             const ScenarioLayout& layout,
                             const std::vector<int>& n_values,
                             int realizations, std::uint64_t base_seed);

}  // namespace rwpcn
