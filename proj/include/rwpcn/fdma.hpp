#pragma once
// FDMA solvers. The block is a WPT slot (alpha0, full band at power p0)
// followed by one WIT slot (alpha1) over N subcarriers; each subcarrier goes
// to at most one pair and its slot is halved between the two hops.
//
// Dual vector layout for the optimal/EEA solvers (q = K*N + K + 2):
// [lambda_{0,0}..lambda_{0,N-1}, ..., lambda_{K-1,N-1}, nu_0..nu_{K-1}, mu,
// xi]. The FSA benchmark keeps one lambda per subcarrier (q = N + K + 2).

#include <cstdint>
#include <span>
#include <vector>

#include "rwpcn/model.hpp"
#include "rwpcn/tdma.hpp"  // SolverFailure, FeasibilityReport

namespace rwpcn {

struct FdmaAllocation {
  double alpha0 = 0.0, alpha1 = 0.0;
  double p0 = 0.0;
  std::vector<std::vector<double>> p;  // KxN relay forwarding powers
  std::vector<std::vector<double>> q;  // KxN source powers
  std::vector<std::vector<std::uint8_t>> x;  // KxN assignment
  std::vector<std::vector<double>> rates;    // KxN
  double sum_rate = 0.0;
  double duality_gap = 0.0;  // (dual - primal)/dual for dual solvers, else 0
  bool warning = false;
};

struct FdmaSolveInfo {
  double dual_objective = 0.0;
  int iterations = 0;
  bool converged = true;
};

struct FdmaInnerSolution {
  std::vector<std::vector<double>> p, q;  // KxN, zero off-assignment
  std::vector<int> assign;                // N: winning pair per subcarrier
  std::vector<double> bracket;            // N: per-SC Lagrangian slope in alpha1
  double alpha0 = 0.0, alpha1 = 0.0, p0 = 0.0;
};

struct FdmaTimeWpt {
  double alpha0 = 0.0, alpha1 = 0.0, p0 = 0.0;
};

// Closed-form per-subcarrier powers at fixed duals (full dual layout).
// xi = 0 clamps p to the peak; nu_k = 0 clamps q to the q_max guard.
std::pair<double, double> fdma_inner_powers(const ChannelInstance& inst,
                                            const SystemParams& params,
                                            std::span<const double> duals,
                                            int k, int n);

// Winning pair for subcarrier n (argmax of the per-SC Lagrangian, ties to the
// lowest index). The subcarrier is always assigned.
int fdma_assign_subcarrier(const ChannelInstance& inst,
                           const SystemParams& params,
                           std::span<const double> duals, int n);

// Bang-bang time/WPT decisions given the per-SC brackets in `inner`.
FdmaTimeWpt fdma_time_and_wpt_decision(std::span<const double> duals,
                                       const SystemParams& params,
                                       const ChannelInstance& inst,
                                       const FdmaInnerSolution& inner);

// Constraint slacks at the inner maximizer (full dual layout).
std::vector<double> fdma_subgradient(const FdmaInnerSolution& inner,
                                     const ChannelInstance& inst,
                                     const SystemParams& params);

// Full inner maximization at fixed duals (full dual layout).
FdmaInnerSolution fdma_inner_solve(const ChannelInstance& inst,
                                   const SystemParams& params,
                                   std::span<const double> duals);

double fdma_dual_value(const FdmaInnerSolution& inner,
                       const ChannelInstance& inst, const SystemParams& params,
                       std::span<const double> duals);

FdmaAllocation solve_fdma_optimal(const ChannelInstance& inst,
                                  const SystemParams& params,
                                  FdmaSolveInfo* info = nullptr);

// Algorithm-4 heuristic: strongest first hop wins each subcarrier, equal
// power allocation, alpha0 by grid search.
FdmaAllocation solve_fdma_suboptimal(const ChannelInstance& inst,
                                     const SystemParams& params,
                                     double grid_step = 0.01);

// Benchmark: WPT energy pinned to P/2, otherwise the optimal machinery.
FdmaAllocation solve_fdma_eea(const ChannelInstance& inst,
                              const SystemParams& params,
                              FdmaSolveInfo* info = nullptr);

// Benchmark: fixed round-robin subcarrier assignment (SC n -> pair n mod K),
// time/power still optimized in the dual domain.
FdmaAllocation solve_fdma_fsa(const ChannelInstance& inst,
                              const SystemParams& params,
                              FdmaSolveInfo* info = nullptr);

FeasibilityReport check_fdma_feasible(const FdmaAllocation& alloc,
                                      const ChannelInstance& inst,
                                      const SystemParams& params);

}  // namespace rwpcn
