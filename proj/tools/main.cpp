// Experiment CLI: single-instance solves plus Monte-Carlo sweeps.
// Exit codes: 0 success, 1 config error, 2 solver failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "rwpcn/config.hpp"
#include "rwpcn/fdma.hpp"
#include "rwpcn/harness.hpp"
#include "rwpcn/model.hpp"
#include "rwpcn/tdma.hpp"

namespace {

using namespace rwpcn;

ParsedScenario load_scenario(const std::string& config_path) {
  if (config_path.empty()) return parse_config("");
  return parse_config_file(config_path);
}

void print_tdma(const TdmaAllocation& a, const TdmaSolveInfo* info) {
  std::printf("sum_rate       %.8f bits/s/Hz\n", a.sum_rate);
  std::printf("alpha0         %.8g\n", a.alpha[0]);
  std::printf("wpt_energy     %.8g J\n", a.s[0]);
  if (info)
    std::printf("dual_objective %.8f (gap %.3e)\n", info->dual_objective,
                info->duality_gap);
  std::printf("%4s %12s %14s %14s %14s\n", "k", "alpha_k", "s_k [J]",
              "m_k [J]", "rate");
  for (std::size_t k = 0; k + 1 < a.alpha.size(); ++k)
    std::printf("%4zu %12.6g %14.6g %14.6g %14.6g\n", k, a.alpha[k + 1],
                a.s[k + 1], a.m[k], a.rates[k]);
}

void print_fdma(const FdmaAllocation& a, const FdmaSolveInfo* info) {
  std::printf("sum_rate       %.8f bits/s/Hz\n", a.sum_rate);
  std::printf("alpha0         %.8g\n", a.alpha0);
  std::printf("alpha1         %.8g\n", a.alpha1);
  std::printf("p0             %.8g W\n", a.p0);
  std::printf("wpt_energy     %.8g J\n", a.alpha0 * a.p0);
  std::printf("duality_gap    %.3e\n", a.duality_gap);
  if (info)
    std::printf("dual_objective %.8f (%d iterations)\n", info->dual_objective,
                info->iterations);
  const std::size_t K = a.p.size();
  std::vector<int> count(K, 0);
  std::vector<double> rate(K, 0.0);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t n = 0; n < a.p[k].size(); ++n) {
      count[k] += a.x[k][n];
      rate[k] += a.rates[k][n];
    }
  std::printf("%4s %6s %14s\n", "k", "#SC", "rate");
  for (std::size_t k = 0; k < K; ++k)
    std::printf("%4zu %6d %14.6g\n", k, count[k], rate[k]);
}

int run_single(const std::string& config_path, std::uint64_t seed,
               const std::string& solver, bool fdma_mode) {
  ParsedScenario sc;
  try {
    sc = load_scenario(config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  }
  try {
    const Geometry geom =
        sample_geometry(sc.layout, sc.params.num_pairs, seed * 2 + 1);
    const ChannelInstance inst = generate_instance(sc.params, geom, seed);
    if (fdma_mode) {
      FdmaSolveInfo info;
      FdmaAllocation a;
      bool has_info = true;
      if (solver == "optimal")
        a = solve_fdma_optimal(inst, sc.params, &info);
      else if (solver == "eea")
        a = solve_fdma_eea(inst, sc.params, &info);
      else if (solver == "fsa")
        a = solve_fdma_fsa(inst, sc.params, &info);
      else if (solver == "suboptimal") {
        a = solve_fdma_suboptimal(inst, sc.params);
        has_info = false;
      } else {
        std::cerr << "config error: unknown solver '" << solver << "'\n";
        return 1;
      }
      const auto rep = check_fdma_feasible(a, inst, sc.params);
      if (!rep.ok) throw SolverFailure("infeasible result: " + rep.detail);
      print_fdma(a, has_info ? &info : nullptr);
    } else {
      TdmaSolveInfo info;
      TdmaAllocation a;
      bool has_info = true;
      if (solver == "optimal")
        a = solve_tdma_optimal(inst, sc.params, &info);
      else if (solver == "eea")
        a = solve_tdma_eea(inst, sc.params, &info);
      else if (solver == "suboptimal") {
        a = solve_tdma_suboptimal(inst, sc.params);
        has_info = false;
      } else if (solver == "era") {
        a = solve_tdma_era(inst, sc.params);
        has_info = false;
      } else {
        std::cerr << "config error: unknown solver '" << solver << "'\n";
        return 1;
      }
      const auto rep = check_tdma_feasible(a, inst, sc.params);
      if (!rep.ok) throw SolverFailure("infeasible result: " + rep.detail);
      print_tdma(a, has_info ? &info : nullptr);
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sum-rate maximizing resource allocation for a relay-assisted "
               "wireless powered network"};
  app.require_subcommand(1);

  std::string config_path, out_path, format = "csv", solver = "optimal";
  std::uint64_t seed = 1;
  std::string n_list = "4,8,16,32,64";

  auto* tdma = app.add_subcommand("solve-tdma", "Solve one TDMA instance");
  tdma->add_option("--config", config_path, "Scenario config file");
  tdma->add_option("--seed", seed, "Channel realization seed");
  tdma->add_option("--solver", solver, "optimal|suboptimal|eea|era");

  auto* fdma = app.add_subcommand("solve-fdma", "Solve one FDMA instance");
  fdma->add_option("--config", config_path, "Scenario config file");
  fdma->add_option("--seed", seed, "Channel realization seed");
  fdma->add_option("--solver", solver, "optimal|suboptimal|eea|fsa");

  auto* sweep = app.add_subcommand("sweep", "Run the configured experiment");
  sweep->add_option("--config", config_path, "Scenario config file");
  sweep->add_option("--out", out_path, "Output file")->required();
  sweep->add_option("--format", format, "csv|json");

  auto* gap = app.add_subcommand("gap", "Duality gap vs number of subcarriers");
  gap->add_option("--config", config_path, "Scenario config file");
  gap->add_option("--n", n_list, "Comma-separated subcarrier counts");
  gap->add_option("--out", out_path, "Output CSV file");

  CLI11_PARSE(app, argc, argv);

  if (tdma->parsed()) return run_single(config_path, seed, solver, false);
  if (fdma->parsed()) return run_single(config_path, seed, solver, true);

  ParsedScenario sc;
  try {
    sc = load_scenario(config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (sweep->parsed()) {
      const ExperimentResult result =
          run_experiment(sc.spec, sc.params, sc.layout);
      emit_result(result, format, out_path);
      for (const auto& err : result.errors)
        std::cerr << "instance failure: " << err << '\n';
      std::cout << "wrote " << out_path << '\n';
      return result.errors.empty() ? 0 : 2;
    }
    // gap subcommand
    std::vector<int> ns;
    std::stringstream ss(n_list);
    std::string item;
    while (std::getline(ss, item, ',')) ns.push_back(std::stoi(item));
    const GapTable table =
        measure_duality_gap(sc.params, sc.layout, ns, sc.spec.realizations,
                            sc.spec.base_seed);
    std::ostringstream csv;
    csv << "n,mean_gap\n";
    for (const auto& row : table.rows)
      csv << row.num_subcarriers << ',' << row.mean_gap << '\n';
    if (out_path.empty()) {
      std::cout << csv.str();
    } else {
      std::ofstream os(out_path);
      os << csv.str();
      if (!os) throw std::runtime_error("cannot write " + out_path);
    }
    std::cout << (table.monotone_nonincreasing
                      ? "gap is nonincreasing in N\n"
                      : "warning: gap is not monotone in N\n");
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return 2;
  }
}
