#include "rwpcn/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

namespace rwpcn {

const char* solver_name(SolverId id) {
  switch (id) {
    case SolverId::TdmaOptimal: return "tdma-optimal";
    case SolverId::TdmaSuboptimal: return "tdma-suboptimal";
    case SolverId::TdmaEea: return "tdma-eea";
    case SolverId::TdmaEra: return "tdma-era";
    case SolverId::FdmaOptimal: return "fdma-optimal";
    case SolverId::FdmaSuboptimal: return "fdma-suboptimal";
    case SolverId::FdmaEea: return "fdma-eea";
    case SolverId::FdmaFsa: return "fdma-fsa";
  }
  return "unknown";
}

bool solver_is_fdma(SolverId id) {
  switch (id) {
    case SolverId::FdmaOptimal:
    case SolverId::FdmaSuboptimal:
    case SolverId::FdmaEea:
    case SolverId::FdmaFsa:
      return true;
    default:
      return false;
  }
}

void ExperimentSpec::validate() const {
  if (grid.empty()) throw std::invalid_argument("experiment grid is empty");
  if (realizations < 1)
    throw std::invalid_argument("realizations must be >= 1");
  if (solvers.empty() && kind != ExperimentKind::GapVsN)
    throw std::invalid_argument("no solvers requested");
}

bool operator==(const CellStats& a, const CellStats& b) {
  return a.mean_sum_rate == b.mean_sum_rate &&
         a.stderr_sum_rate == b.stderr_sum_rate &&
         a.mean_alpha0 == b.mean_alpha0 &&
         a.mean_wpt_energy == b.mean_wpt_energy && a.mean_gap == b.mean_gap &&
         a.mean_ms == b.mean_ms && a.failures == b.failures;
}

std::uint64_t realization_seed(std::uint64_t base, int grid_index,
                               int realization) {
  return base + static_cast<std::uint64_t>(grid_index) * 1000000ull +
         static_cast<std::uint64_t>(realization);
}

namespace {

struct SolveSample {
  double sum_rate = 0.0;
  double alpha0 = 0.0;
  double wpt_energy = 0.0;
  double gap = 0.0;
  double ms = 0.0;
  bool ok = false;
  std::string error;
};

// Scenario at one grid point.
struct CellSetup {
  SystemParams params;
  ScenarioLayout layout;
};

CellSetup apply_grid_point(const ExperimentSpec& spec,
                           const SystemParams& base,
                           const ScenarioLayout& layout, double value) {
  CellSetup c{base, layout};
  auto dbm_to_w = [](double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); };
  switch (spec.kind) {
    case ExperimentKind::PowerSweep:
      c.params.total_energy = dbm_to_w(value);
      c.params.peak_power = spec.peak_ratio * c.params.total_energy;
      break;
    case ExperimentKind::GapVsN:
      c.params.num_subcarriers = static_cast<int>(value);
      break;
    case ExperimentKind::RelayPosition:
      c.layout.relay_position.x = value;
      break;
    case ExperimentKind::PairsSweep: {
      const int k = static_cast<int>(value);
      const double cost = c.params.processing_cost.empty()
                              ? 1e-7
                              : c.params.processing_cost.front();
      c.params.num_pairs = k;
      c.params.processing_cost.assign(k, cost);
      break;
    }
    case ExperimentKind::PeakSweep:
      c.params.peak_power = dbm_to_w(value);
      break;
  }
  return c;
}

SolveSample solve_one(const CellSetup& cell, SolverId solver,
                      std::uint64_t seed, bool record_timing) {
  SolveSample out;
  try {
    const Geometry geom =
        sample_geometry(cell.layout, cell.params.num_pairs, seed * 2 + 1);
    const ChannelInstance inst = generate_instance(cell.params, geom, seed);
    const auto t0 = std::chrono::steady_clock::now();
    switch (solver) {
      case SolverId::TdmaOptimal:
      case SolverId::TdmaSuboptimal:
      case SolverId::TdmaEea:
      case SolverId::TdmaEra: {
        TdmaSolveInfo info;
        TdmaAllocation a;
        if (solver == SolverId::TdmaOptimal)
          a = solve_tdma_optimal(inst, cell.params, &info);
        else if (solver == SolverId::TdmaEea)
          a = solve_tdma_eea(inst, cell.params, &info);
        else if (solver == SolverId::TdmaSuboptimal)
          a = solve_tdma_suboptimal(inst, cell.params);
        else
          a = solve_tdma_era(inst, cell.params);
        const auto rep = check_tdma_feasible(a, inst, cell.params);
        if (!rep.ok) throw SolverFailure("infeasible allocation: " + rep.detail);
        out.sum_rate = a.sum_rate;
        out.alpha0 = a.alpha[0];
        out.wpt_energy = a.s[0];
        const bool dual = solver == SolverId::TdmaOptimal ||
                          solver == SolverId::TdmaEea;
        out.gap = dual ? info.duality_gap /
                             std::max(info.dual_objective, 1e-12)
                       : 0.0;
        break;
      }
      default: {
        FdmaSolveInfo info;
        FdmaAllocation a;
        if (solver == SolverId::FdmaOptimal)
          a = solve_fdma_optimal(inst, cell.params, &info);
        else if (solver == SolverId::FdmaEea)
          a = solve_fdma_eea(inst, cell.params, &info);
        else if (solver == SolverId::FdmaFsa)
          a = solve_fdma_fsa(inst, cell.params, &info);
        else
          a = solve_fdma_suboptimal(inst, cell.params);
        const auto rep = check_fdma_feasible(a, inst, cell.params);
        if (!rep.ok) throw SolverFailure("infeasible allocation: " + rep.detail);
        out.sum_rate = a.sum_rate;
        out.alpha0 = a.alpha0;
        out.wpt_energy = a.alpha0 * a.p0;
        out.gap = a.duality_gap;
        break;
      }
    }
    if (record_timing) {
      const auto t1 = std::chrono::steady_clock::now();
      out.ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    }
    out.ok = true;
  } catch (const std::exception& e) {
    out.ok = false;
    out.error = e.what();
  }
  return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec,
                                const SystemParams& params,
                                const ScenarioLayout& layout) {
  spec.validate();
  ExperimentResult result;
  result.grid = spec.grid;
  result.solvers = spec.solvers;
  result.cells.assign(spec.grid.size(),
                      std::vector<CellStats>(spec.solvers.size()));

  int workers = spec.num_threads > 0
                    ? spec.num_threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, spec.realizations));

  for (std::size_t gi = 0; gi < spec.grid.size(); ++gi) {
    const CellSetup cell =
        apply_grid_point(spec, params, layout, spec.grid[gi]);
    for (std::size_t si = 0; si < spec.solvers.size(); ++si) {
      const SolverId solver = spec.solvers[si];
      std::vector<SolveSample> samples(spec.realizations);

      std::atomic<int> next{0};
      auto worker = [&]() {
        for (;;) {
          const int r = next.fetch_add(1);
          if (r >= spec.realizations) break;
          samples[r] =
              solve_one(cell, solver, realization_seed(spec.base_seed, gi, r),
                        spec.record_timing);
        }
      };
      std::vector<std::thread> pool;
      for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
      worker();
      for (auto& t : pool) t.join();

      // Index-ordered reduction keeps floating-point sums reproducible.
      CellStats stats;
      double sum = 0.0, sum2 = 0.0;
      int n_ok = 0;
      for (int r = 0; r < spec.realizations; ++r) {
        const auto& s = samples[r];
        if (!s.ok) {
          ++stats.failures;
          result.errors.push_back(std::string(solver_name(solver)) +
                                  " grid=" + std::to_string(spec.grid[gi]) +
                                  " seed=" +
                                  std::to_string(realization_seed(
                                      spec.base_seed, gi, r)) +
                                  ": " + s.error);
          continue;
        }
        ++n_ok;
        sum += s.sum_rate;
        sum2 += s.sum_rate * s.sum_rate;
        stats.mean_alpha0 += s.alpha0;
        stats.mean_wpt_energy += s.wpt_energy;
        stats.mean_gap += s.gap;
        stats.mean_ms += s.ms;
      }
      if (n_ok > 0) {
        stats.mean_sum_rate = sum / n_ok;
        stats.mean_alpha0 /= n_ok;
        stats.mean_wpt_energy /= n_ok;
        stats.mean_gap /= n_ok;
        stats.mean_ms /= n_ok;
        if (n_ok > 1) {
          const double var =
              std::max(0.0, (sum2 - sum * sum / n_ok) / (n_ok - 1));
          stats.stderr_sum_rate = std::sqrt(var / n_ok);
        }
      }
      result.cells[gi][si] = stats;
    }
  }
  return result;
}

GapTable measure_duality_gap(const SystemParams& params,
                             const ScenarioLayout& layout,
                             const std::vector<int>& n_values,
                             int realizations, std::uint64_t base_seed) {
  for (std::size_t i = 1; i < n_values.size(); ++i)
    if (n_values[i] < n_values[i - 1])
      throw std::invalid_argument("n_values must be sorted ascending");
  ExperimentSpec spec;
  spec.kind = ExperimentKind::GapVsN;
  spec.grid.assign(n_values.begin(), n_values.end());
  spec.realizations = realizations;
  spec.base_seed = base_seed;
  spec.solvers = {SolverId::FdmaOptimal};
  spec.record_timing = false;
  const auto result = run_experiment(spec, params, layout);
  GapTable table;
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    table.rows.push_back({n_values[i], result.cells[i][0].mean_gap});
    if (i > 0 && table.rows[i].mean_gap > table.rows[i - 1].mean_gap)
      table.monotone_nonincreasing = false;
  }
  return table;
}

}  // namespace rwpcn
