#pragma once
// TDMA solvers. The block is split into a WPT slot (duration alpha[0]) and K
// forwarding slots; pair k's slot is halved between source->relay and
// relay->destination. Working variables are energies: s[0] = alpha0*p0 and
// s[k] = alpha_k p_k / 2 at the relay, m[k] = alpha_k q_k / 2 at source k.
//
// Dual vector layout (q = 2K+2): [lambda_0..lambda_{K-1}, nu_0..nu_{K-1},
// mu, xi] with pairs indexed from 0.

#include <span>
#include <string>
#include <vector>

#include "rwpcn/ellipsoid.hpp"
#include "rwpcn/model.hpp"

namespace rwpcn {

struct SolverFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TdmaAllocation {
  std::vector<double> alpha;  // K+1, alpha[0] = WPT slot
  std::vector<double> s;      // K+1, s[0] = WPT energy
  std::vector<double> m;      // K
  std::vector<double> rates;  // K
  double sum_rate = 0.0;
  bool warning = false;  // inner-loop cap hit or zero-rate fallback
};

struct TdmaSolveInfo {
  double dual_objective = 0.0;
  double duality_gap = 0.0;  // dual_objective - sum_rate
  int iterations = 0;
  bool converged = true;
};

// Inner maximizer of the per-pair Lagrangian term at fixed duals.
struct TdmaInnerSolution {
  std::vector<double> alpha;  // K (WIT slots only)
  std::vector<double> s, m;   // K
  double s0 = 0.0, alpha0 = 0.0;
  bool warning = false;
};

struct FeasibilityReport {
  bool ok = true;
  std::string detail;
};

// (alpha/2) log2(1 + 2 e g / (alpha sigma2)); 0 when alpha or e is 0.
double half_slot_rate(double alpha, double energy, double gain, double sigma2);

// Closed-form (s_k, m_k) maximizing the pair Lagrangian at fixed alpha_k.
// Nonpositive energy prices clamp to the peak (s) or to the harvest bound (m).
std::pair<double, double> inner_energy_allocation(
    const ChannelInstance& inst, const SystemParams& params, double alpha_k,
    std::span<const double> duals, int k);

// Root of dL_k/dalpha_k on [alpha_lo, 1] by bisection (derivative decreasing).
double inner_time_allocation(const ChannelInstance& inst,
                             const SystemParams& params, double s_k,
                             double m_k, std::span<const double> duals, int k,
                             double alpha_lo = 1e-6);

struct TdmaInnerPoint {
  double s = 0.0, m = 0.0, alpha = 0.0;
  double lagrangian = 0.0;
  bool converged = true;
};

// Block-coordinate ascent between the energy and time blocks from
// alpha = 1/K; the pair Lagrangian is jointly concave so this reaches its
// maximum over the slab {s <= alpha/2 P_peak, m <= harvest bound}.
TdmaInnerPoint inner_bcd(const ChannelInstance& inst,
                         const SystemParams& params,
                         std::span<const double> duals, int k,
                         double tol = 1e-8, int max_rounds = 100);

// Bang-bang WPT slot: charge at peak iff the harvest value of relay energy
// exceeds its price; ties switch off.
std::pair<double, double> wpt_slot_decision(std::span<const double> duals,
                                            const SystemParams& params,
                                            const ChannelInstance& inst);

// Constraint slacks at the current inner maximizer (ellipsoid cut vector).
std::vector<double> tdma_subgradient(const TdmaInnerSolution& inner,
                                     const ChannelInstance& inst,
                                     const SystemParams& params);

// Full inner maximization at fixed duals. Pairs whose best interior value is
// negative are switched off (alpha = s = m = 0). When fixed_wpt is set the
// WPT slot is pinned (EEA) instead of the bang-bang rule.
TdmaInnerSolution tdma_inner_solve(const ChannelInstance& inst,
                                   const SystemParams& params,
                                   std::span<const double> duals,
                                   const double* fixed_s0 = nullptr,
                                   const double* fixed_alpha0 = nullptr,
                                   double bcd_tol = 1e-8);

// Dual function value g(duals) at the inner maximizer.
double tdma_dual_value(const TdmaInnerSolution& inner,
                       const ChannelInstance& inst, const SystemParams& params,
                       std::span<const double> duals);

// Pair-k Lagrangian term at an arbitrary point (test/grid-oracle hook).
double tdma_pair_lagrangian(const ChannelInstance& inst,
                            const SystemParams& params,
                            std::span<const double> duals, int k, double s,
                            double m, double alpha);

// d L_k / d alpha at fixed energies (the function bisected above).
double tdma_alpha_derivative(const ChannelInstance& inst,
                             const SystemParams& params,
                             std::span<const double> duals, int k, double s,
                             double m, double alpha);

// Upper bound on any feasible m_k (harvest chain with the full budget).
std::vector<double> tdma_harvest_caps(const ChannelInstance& inst,
                                      const SystemParams& params);

// Minimal s0 covering every source's energy causality at fixed (s, m),
// via the one-variable terminal LP. Throws LpInfeasible if the needs exceed
// the caps.
double tdma_terminal_s0(const ChannelInstance& inst, const SystemParams& params,
                        std::span<const double> alpha, std::span<const double> s,
                        std::span<const double> m);

TdmaAllocation solve_tdma_optimal(const ChannelInstance& inst,
                                  const SystemParams& params,
                                  TdmaSolveInfo* info = nullptr);

// Algorithm-2 heuristic: first-hop sum-rate proportional time split with
// equal relay power, alpha0 by grid search.
TdmaAllocation solve_tdma_suboptimal(const ChannelInstance& inst,
                                     const SystemParams& params,
                                     double grid_step = 0.01);

// Benchmark: WPT energy pinned to P/2, the rest optimized as in the optimal
// solver.
TdmaAllocation solve_tdma_eea(const ChannelInstance& inst,
                              const SystemParams& params,
                              TdmaSolveInfo* info = nullptr);

// Benchmark: equal WIT time and relay power, alpha0 by grid search.
TdmaAllocation solve_tdma_era(const ChannelInstance& inst,
                              const SystemParams& params,
                              double grid_step = 0.01);

FeasibilityReport check_tdma_feasible(const TdmaAllocation& alloc,
                                      const ChannelInstance& inst,
                                      const SystemParams& params);

}  // namespace rwpcn
