#pragma once
// Test-only brute-force oracles, independent of the solver code paths.

#include "rwpcn/fdma.hpp"
#include "rwpcn/model.hpp"
#include "rwpcn/tdma.hpp"

namespace rwpcn::oracle {

// Exhaustive grid search for K=1 TDMA: alpha0 and the relay energy split at
// `step` resolution, with the analytic reductions p0 = P_peak, alpha1 =
// 1 - alpha0 and the source spending its whole harvest (objective is
// monotone in each). Returns the best sum-rate.
double tdma_k1_best_rate(const ChannelInstance& inst,
                         const SystemParams& params, double step = 1e-3);

// Exhaustive search for K=2, N=2 FDMA: all 3^2 assignments x grids over
// alpha0 and the relay/source energy splits at `step` resolution.
double fdma_k2n2_best_rate(const ChannelInstance& inst,
                           const SystemParams& params, double step = 1e-2);

// Dense grid maximum of the pair-k Lagrangian over (s, m) at fixed alpha.
double tdma_energy_grid_max(const ChannelInstance& inst,
                            const SystemParams& params,
                            std::span<const double> duals, int k,
                            double alpha, int grid = 300);

// Dense grid argmax of the pair-k Lagrangian over alpha at fixed energies.
double tdma_alpha_grid_argmax(const ChannelInstance& inst,
                              const SystemParams& params,
                              std::span<const double> duals, int k, double s,
                              double m, double step = 1e-4);

// Dense grid maximum of the per-subcarrier FDMA Lagrangian over (p, q).
double fdma_sc_grid_max(const ChannelInstance& inst, const SystemParams& params,
                        std::span<const double> duals, int k, int n,
                        int grid = 400);

}  // namespace rwpcn::oracle
