#include "rwpcn/fdma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rwpcn/ellipsoid.hpp"
#include "rwpcn/numerics.hpp"

namespace rwpcn {

namespace {

constexpr double kLn2 = 0.6931471805599453;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kAlphaMin = 1e-6;  // guard used by the q_max clamp

// Dual layout shared by the optimal/EEA (one lambda per (k,n)) and FSA
// (one lambda per subcarrier) loops.
struct FdmaLayout {
  int K = 0, N = 0;
  std::vector<int> fixed_assign;  // FSA; empty = free assignment

  int lambda_count() const {
    return fixed_assign.empty() ? K * N : N;
  }
  std::size_t dim() const { return lambda_count() + K + 2; }
  int lambda_index(int k, int n) const {
    return fixed_assign.empty() ? k * N + n : n;
  }
  double lambda(std::span<const double> d, int k, int n) const {
    return d[lambda_index(k, n)];
  }
  double nu(std::span<const double> d, int k) const {
    return d[lambda_count() + k];
  }
  double mu(std::span<const double> d) const { return d[lambda_count() + K]; }
  double xi(std::span<const double> d) const {
    return d[lambda_count() + K + 1];
  }
};

double q_max_guard(const ChannelInstance& inst, const SystemParams& params) {
  double gmax = 0.0;
  for (double g : inst.g_wpt) gmax = std::max(gmax, g);
  return 2.0 * params.conversion_efficiency * params.total_energy * gmax /
         kAlphaMin;
}

// Rate of one hop on one subcarrier per unit alpha1.
double sc_rate_coeff(double power, double gain, double sigma2, int n_sc) {
  if (power <= 0.0) return 0.0;
  return std::log2(1.0 + power * gain / sigma2) / (2.0 * n_sc);
}

std::pair<double, double> scalar_inner_powers(const ChannelInstance& inst,
                                              const SystemParams& params,
                                              double lam, double nu, double xi,
                                              double qmax, int k, int n) {
  const double sigma2 = inst.noise_power_fdma;
  const int N = params.num_subcarriers;
  double p;
  if (xi > 0.0) {
    p = std::min(std::max((1.0 - lam) / (xi * N * kLn2) -
                              sigma2 / inst.h2_fdma[k][n],
                          0.0),
                 params.peak_power);
  } else {
    p = params.peak_power;
  }
  double q;
  if (nu > 0.0) {
    q = std::min(
        std::max(lam / (nu * N * kLn2) - sigma2 / inst.h1_fdma[k][n], 0.0),
        qmax);
  } else {
    q = qmax;
  }
  return {p, q};
}

// Per-SC Lagrangian slope in alpha1 if pair k occupies subcarrier n with the
// given powers; always >= 0 at the optimal powers since (0,0) scores 0.
double scalar_candidate_value(const ChannelInstance& inst,
                              const SystemParams& params, double lam,
                              double nu, double xi, int k, int n, double p,
                              double q) {
  const double sigma2 = inst.noise_power_fdma;
  const int N = params.num_subcarriers;
  const double r1 = sc_rate_coeff(q, inst.h1_fdma[k][n], sigma2, N);
  const double r2 = sc_rate_coeff(p, inst.h2_fdma[k][n], sigma2, N);
  return lam * r1 + (1.0 - lam) * r2 - 0.5 * (xi * p + nu * q);
}

std::pair<double, double> inner_powers_impl(const ChannelInstance& inst,
                                            const SystemParams& params,
                                            const FdmaLayout& lay,
                                            std::span<const double> duals,
                                            int k, int n) {
  return scalar_inner_powers(inst, params, lay.lambda(duals, k, n),
                             lay.nu(duals, k), lay.xi(duals),
                             q_max_guard(inst, params), k, n);
}

double candidate_value(const ChannelInstance& inst, const SystemParams& params,
                       const FdmaLayout& lay, std::span<const double> duals,
                       int k, int n, double p, double q) {
  return scalar_candidate_value(inst, params, lay.lambda(duals, k, n),
                                lay.nu(duals, k), lay.xi(duals), k, n, p, q);
}

// The per-SC term is convex in lambda with derivative R1(q*(lam)) -
// R2(p*(lam)) (envelope theorem); its minimizer balances the two hop rates.
double sc_lambda_minimizer(const ChannelInstance& inst,
                           const SystemParams& params, double nu, double xi,
                           double qmax, int k, int n) {
  const double sigma2 = inst.noise_power_fdma;
  const int N = params.num_subcarriers;
  auto neg_slope = [&](double lam) {
    const auto [p, q] =
        scalar_inner_powers(inst, params, lam, nu, xi, qmax, k, n);
    return sc_rate_coeff(p, inst.h2_fdma[k][n], sigma2, N) -
           sc_rate_coeff(q, inst.h1_fdma[k][n], sigma2, N);
  };
  return bisect(neg_slope, 0.0, 1.0, 1e-9);
}

// Inner maximization with each lambda at its per-SC minimizer; duals are the
// coupling multipliers only: [nu_0..nu_{K-1}, mu, xi].
FdmaInnerSolution reduced_inner_solve(const ChannelInstance& inst,
                                      const SystemParams& params,
                                      const std::vector<int>& fixed_assign,
                                      std::span<const double> duals,
                                      const double* fixed_alpha0) {
  const int K = params.num_pairs, N = params.num_subcarriers;
  const double mu = duals[K], xi = duals[K + 1];
  const double qmax = q_max_guard(inst, params);
  FdmaInnerSolution sol;
  sol.p.assign(K, std::vector<double>(N, 0.0));
  sol.q.assign(K, std::vector<double>(N, 0.0));
  sol.assign.assign(N, 0);
  sol.bracket.assign(N, 0.0);

  for (int n = 0; n < N; ++n) {
    int best_k = 0;
    double best_val = -kInf, best_p = 0.0, best_q = 0.0;
    auto try_pair = [&](int k) {
      const double lam =
          sc_lambda_minimizer(inst, params, duals[k], xi, qmax, k, n);
      const auto [p, q] =
          scalar_inner_powers(inst, params, lam, duals[k], xi, qmax, k, n);
      const double val =
          scalar_candidate_value(inst, params, lam, duals[k], xi, k, n, p, q);
      if (val > best_val) {
        best_val = val;
        best_k = k;
        best_p = p;
        best_q = q;
      }
    };
    if (fixed_assign.empty()) {
      for (int k = 0; k < K; ++k) try_pair(k);
    } else {
      try_pair(fixed_assign[n]);
    }
    sol.assign[n] = best_k;
    sol.p[best_k][n] = best_p;
    sol.q[best_k][n] = best_q;
    sol.bracket[n] = std::max(best_val, 0.0);
  }

  double psi = -mu;
  for (int n = 0; n < N; ++n) psi += sol.bracket[n];
  sol.alpha1 = psi > 0.0 ? 1.0 : 0.0;

  const double eta = params.conversion_efficiency;
  double w = 0.0;
  for (int k = 0; k < K; ++k) w += duals[k] * inst.g_wpt[k];
  w *= eta;
  if (fixed_alpha0) {
    sol.alpha0 = *fixed_alpha0;
    sol.p0 = params.peak_power;
  } else {
    sol.alpha0 =
        (w * params.peak_power - xi * params.peak_power - mu > 0.0) ? 1.0 : 0.0;
    sol.p0 = (w - xi > 0.0) ? params.peak_power : 0.0;
  }
  return sol;
}

double reduced_dual_value(const FdmaInnerSolution& inner,
                          const ChannelInstance& inst,
                          const SystemParams& params,
                          std::span<const double> duals) {
  const int K = params.num_pairs;
  const double mu = duals[K], xi = duals[K + 1];
  const double eta = params.conversion_efficiency;
  double g = 0.0;
  for (double b : inner.bracket) g += b;
  g *= inner.alpha1;
  g += mu * (1.0 - inner.alpha0 - inner.alpha1);
  g += xi * (params.total_energy - inner.alpha0 * inner.p0);
  for (int k = 0; k < K; ++k)
    g += duals[k] * (eta * inner.alpha0 * inner.p0 * inst.g_wpt[k] -
                     params.processing_cost[k]);
  return g;
}

std::vector<double> reduced_subgradient(const FdmaInnerSolution& inner,
                                        const ChannelInstance& inst,
                                        const SystemParams& params) {
  const int K = params.num_pairs, N = params.num_subcarriers;
  const double eta = params.conversion_efficiency;
  std::vector<double> g(K + 2, 0.0);
  double p_sum = 0.0;
  std::vector<double> q_sum(K, 0.0);
  for (int n = 0; n < N; ++n) {
    const int k = inner.assign[n];
    p_sum += inner.p[k][n];
    q_sum[k] += inner.q[k][n];
  }
  for (int k = 0; k < K; ++k)
    g[k] = eta * inner.alpha0 * inner.p0 * inst.g_wpt[k] -
           0.5 * inner.alpha1 * q_sum[k] - params.processing_cost[k];
  g[K] = 1.0 - inner.alpha0 - inner.alpha1;
  g[K + 1] = params.total_energy - inner.alpha0 * inner.p0 -
             0.5 * inner.alpha1 * p_sum;
  return g;
}

FdmaInnerSolution inner_solve_impl(const ChannelInstance& inst,
                                   const SystemParams& params,
                                   const FdmaLayout& lay,
                                   std::span<const double> duals,
                                   const double* fixed_alpha0) {
  const int K = params.num_pairs, N = params.num_subcarriers;
  FdmaInnerSolution sol;
  sol.p.assign(K, std::vector<double>(N, 0.0));
  sol.q.assign(K, std::vector<double>(N, 0.0));
  sol.assign.assign(N, 0);
  sol.bracket.assign(N, 0.0);

  for (int n = 0; n < N; ++n) {
    int best_k = 0;
    double best_val = -kInf, best_p = 0.0, best_q = 0.0;
    if (lay.fixed_assign.empty()) {
      for (int k = 0; k < K; ++k) {
        auto [p, q] = inner_powers_impl(inst, params, lay, duals, k, n);
        const double val =
            candidate_value(inst, params, lay, duals, k, n, p, q);
        if (val > best_val) {
          best_val = val;
          best_k = k;
          best_p = p;
          best_q = q;
        }
      }
    } else {
      best_k = lay.fixed_assign[n];
      std::tie(best_p, best_q) =
          inner_powers_impl(inst, params, lay, duals, best_k, n);
      best_val =
          candidate_value(inst, params, lay, duals, best_k, n, best_p, best_q);
    }
    sol.assign[n] = best_k;
    sol.p[best_k][n] = best_p;
    sol.q[best_k][n] = best_q;
    sol.bracket[n] = std::max(best_val, 0.0);
  }

  double psi = -lay.mu(duals);
  for (int n = 0; n < N; ++n) psi += sol.bracket[n];
  sol.alpha1 = psi > 0.0 ? 1.0 : 0.0;

  const double eta = params.conversion_efficiency;
  double w = 0.0;
  for (int k = 0; k < K; ++k) w += lay.nu(duals, k) * inst.g_wpt[k];
  w *= eta;
  if (fixed_alpha0) {
    sol.alpha0 = *fixed_alpha0;
    sol.p0 = params.peak_power;
  } else {
    const double xi = lay.xi(duals);
    sol.alpha0 = (w * params.peak_power - xi * params.peak_power -
                      lay.mu(duals) >
                  0.0)
                     ? 1.0
                     : 0.0;
    sol.p0 = (w - xi > 0.0) ? params.peak_power : 0.0;
  }
  return sol;
}

double dual_value_impl(const FdmaInnerSolution& inner,
                       const ChannelInstance& inst, const SystemParams& params,
                       const FdmaLayout& lay, std::span<const double> duals) {
  const int K = params.num_pairs;
  const double eta = params.conversion_efficiency;
  double g = 0.0;
  for (double b : inner.bracket) g += b;
  g *= inner.alpha1;
  g += lay.mu(duals) * (1.0 - inner.alpha0 - inner.alpha1);
  g += lay.xi(duals) * (params.total_energy - inner.alpha0 * inner.p0);
  for (int k = 0; k < K; ++k)
    g += lay.nu(duals, k) * (eta * inner.alpha0 * inner.p0 * inst.g_wpt[k] -
                             params.processing_cost[k]);
  return g;
}

std::vector<double> subgradient_impl(const FdmaInnerSolution& inner,
                                     const ChannelInstance& inst,
                                     const SystemParams& params,
                                     const FdmaLayout& lay) {
  const int K = params.num_pairs, N = params.num_subcarriers;
  const double sigma2 = inst.noise_power_fdma;
  const double eta = params.conversion_efficiency;
  std::vector<double> g(lay.dim(), 0.0);

  double p_sum = 0.0;
  std::vector<double> q_sum(K, 0.0);
  for (int n = 0; n < N; ++n) {
    const int k = inner.assign[n];
    const double p = inner.p[k][n], q = inner.q[k][n];
    p_sum += p;
    q_sum[k] += q;
    const double r1 =
        inner.alpha1 * sc_rate_coeff(q, inst.h1_fdma[k][n], sigma2, N);
    const double r2 =
        inner.alpha1 * sc_rate_coeff(p, inst.h2_fdma[k][n], sigma2, N);
    g[lay.lambda_index(k, n)] = r1 - r2;
  }
  g[lay.lambda_count() + K] = 1.0 - inner.alpha0 - inner.alpha1;
  g[lay.lambda_count() + K + 1] = params.total_energy -
                                  inner.alpha0 * inner.p0 -
                                  0.5 * inner.alpha1 * p_sum;
  for (int k = 0; k < K; ++k)
    g[lay.lambda_count() + k] = eta * inner.alpha0 * inner.p0 * inst.g_wpt[k] -
                                0.5 * inner.alpha1 * q_sum[k] -
                                params.processing_cost[k];
  return g;
}

}  // namespace

std::pair<double, double> fdma_inner_powers(const ChannelInstance& inst,
                                            const SystemParams& params,
                                            std::span<const double> duals,
                                            int k, int n) {
  const FdmaLayout lay{params.num_pairs, params.num_subcarriers, {}};
  return inner_powers_impl(inst, params, lay, duals, k, n);
}

int fdma_assign_subcarrier(const ChannelInstance& inst,
                           const SystemParams& params,
                           std::span<const double> duals, int n) {
  const FdmaLayout lay{params.num_pairs, params.num_subcarriers, {}};
  int best_k = 0;
  double best_val = -kInf;
  for (int k = 0; k < params.num_pairs; ++k) {
    auto [p, q] = inner_powers_impl(inst, params, lay, duals, k, n);
    const double val = candidate_value(inst, params, lay, duals, k, n, p, q);
    if (val > best_val) {
      best_val = val;
      best_k = k;
    }
  }
  return best_k;
}

FdmaInnerSolution fdma_inner_solve(const ChannelInstance& inst,
                                   const SystemParams& params,
                                   std::span<const double> duals) {
  const FdmaLayout lay{params.num_pairs, params.num_subcarriers, {}};
  return inner_solve_impl(inst, params, lay, duals, nullptr);
}

FdmaTimeWpt fdma_time_and_wpt_decision(std::span<const double> duals,
                                       const SystemParams& params,
                                       const ChannelInstance& inst,
                                       const FdmaInnerSolution& inner) {
  const FdmaLayout lay{params.num_pairs, params.num_subcarriers, {}};
  FdmaTimeWpt out;
  double psi = -lay.mu(duals);
  for (double b : inner.bracket) psi += b;
  out.alpha1 = psi > 0.0 ? 1.0 : 0.0;
  double w = 0.0;
  for (int k = 0; k < params.num_pairs; ++k)
    w += lay.nu(duals, k) * inst.g_wpt[k];
  w *= params.conversion_efficiency;
  const double xi = lay.xi(duals);
  out.alpha0 =
      (w * params.peak_power - xi * params.peak_power - lay.mu(duals) > 0.0)
          ? 1.0
          : 0.0;
  out.p0 = (w - xi > 0.0) ? params.peak_power : 0.0;
  return out;
}

std::vector<double> fdma_subgradient(const FdmaInnerSolution& inner,
                                     const ChannelInstance& inst,
                                     const SystemParams& params) {
  const FdmaLayout lay{params.num_pairs, params.num_subcarriers, {}};
  return subgradient_impl(inner, inst, params, lay);
}

double fdma_dual_value(const FdmaInnerSolution& inner,
                       const ChannelInstance& inst, const SystemParams& params,
                       std::span<const double> duals) {
  const FdmaLayout lay{params.num_pairs, params.num_subcarriers, {}};
  return dual_value_impl(inner, inst, params, lay, duals);
}

// ---------------------------------------------------------------------------
// Primal recovery
// ---------------------------------------------------------------------------

namespace {

double sc_min_rate(const ChannelInstance& inst, int k, int n, double alpha1,
                   double p, double q, int n_sc) {
  const double sigma2 = inst.noise_power_fdma;
  return alpha1 * std::min(sc_rate_coeff(q, inst.h1_fdma[k][n], sigma2, n_sc),
                           sc_rate_coeff(p, inst.h2_fdma[k][n], sigma2, n_sc));
}

FdmaAllocation fdma_minimal_allocation(const ChannelInstance& inst,
                                       const SystemParams& params) {
  const int K = params.num_pairs, N = params.num_subcarriers;
  double s0 = 0.0;
  for (int k = 0; k < K; ++k)
    s0 = std::max(s0, params.processing_cost[k] /
                          (params.conversion_efficiency * inst.g_wpt[k]));
  s0 *= 1.0 + 1e-12;
  if (s0 > std::min(params.total_energy, params.peak_power))
    throw SolverFailure("instance cannot cover processing costs");
  FdmaAllocation out;
  out.alpha0 = s0 > 0.0 ? s0 / params.peak_power : 0.0;
  out.alpha1 = 0.0;
  out.p0 = s0 > 0.0 ? params.peak_power : 0.0;
  out.p.assign(K, std::vector<double>(N, 0.0));
  out.q.assign(K, std::vector<double>(N, 0.0));
  out.x.assign(K, std::vector<std::uint8_t>(N, 0));
  out.rates.assign(K, std::vector<double>(N, 0.0));
  out.warning = true;
  return out;
}

// Terminal LP over (alpha0, alpha1) with the powers and assignment fixed and
// p0 = P_peak. Shrinks the source powers if the LP is infeasible.
FdmaAllocation fdma_recover(FdmaInnerSolution inner,
                            const ChannelInstance& inst,
                            const SystemParams& params,
                            const double* fixed_alpha0) {
  const int K = params.num_pairs, N = params.num_subcarriers;
  const double eta = params.conversion_efficiency;
  const double peak = params.peak_power;
  const double P = params.total_energy;

  // A subcarrier whose min-rate is zero only burns energy: switch it off.
  for (int n = 0; n < N; ++n) {
    const int k = inner.assign[n];
    if (inner.p[k][n] <= 0.0 || inner.q[k][n] <= 0.0) {
      inner.p[k][n] = 0.0;
      inner.q[k][n] = 0.0;
    }
  }

  bool warning = false;
  double alpha0 = 0.0, alpha1 = 0.0;
  for (int attempt = 0;; ++attempt) {
    if (attempt > 60) return fdma_minimal_allocation(inst, params);
    double c_p = 0.0;
    std::vector<double> c_q(K, 0.0);
    for (int n = 0; n < N; ++n) {
      const int k = inner.assign[n];
      c_p += 0.5 * inner.p[k][n];
      c_q[k] += 0.5 * inner.q[k][n];
    }
    try {
      if (fixed_alpha0) {
        alpha0 = *fixed_alpha0;
        std::vector<HalfPlane> cons;
        cons.push_back({1.0, 0.0, 1.0 - alpha0});
        cons.push_back({c_p, 0.0, P - alpha0 * peak});
        for (int k = 0; k < K; ++k)
          cons.push_back({c_q[k], 0.0,
                          eta * alpha0 * peak * inst.g_wpt[k] -
                              params.processing_cost[k]});
        alpha1 = solve_tiny_lp({1.0, 0.0}, cons, {0.0, 0.0}, {1.0, 0.0}, 1)[0];
      } else {
        std::vector<HalfPlane> cons;
        cons.push_back({1.0, 1.0, 1.0});
        cons.push_back({peak, c_p, P});
        for (int k = 0; k < K; ++k)
          cons.push_back({-eta * peak * inst.g_wpt[k], c_q[k],
                          -params.processing_cost[k]});
        const auto a = solve_tiny_lp({0.0, 1.0}, cons, {0.0, 0.0}, {1.0, 1.0});
        alpha0 = a[0];
        alpha1 = a[1];
      }
      break;
    } catch (const LpInfeasible&) {
      // Shrink every source power and retry.
      warning = true;
      for (int n = 0; n < N; ++n) {
        const int k = inner.assign[n];
        inner.q[k][n] *= 0.7;
        if (inner.q[k][n] < 1e-30) inner.q[k][n] = 0.0;
      }
    }
  }

  // Numerical belt: rescale rows if any constraint is still slightly over.
  for (int k = 0; k < K; ++k) {
    double spend = 0.0;
    for (int n = 0; n < N; ++n)
      if (inner.assign[n] == k) spend += 0.5 * alpha1 * inner.q[k][n];
    const double budget =
        eta * alpha0 * peak * inst.g_wpt[k] - params.processing_cost[k];
    if (spend > budget && spend > 0.0) {
      const double f = std::max(budget, 0.0) / spend;
      for (int n = 0; n < N; ++n) inner.q[k][n] *= f;
    }
  }
  double hrn_spend = alpha0 * peak;
  for (int n = 0; n < N; ++n)
    hrn_spend += 0.5 * alpha1 * inner.p[inner.assign[n]][n];
  if (hrn_spend > P) {
    const double f = (P - alpha0 * peak) /
                     std::max(hrn_spend - alpha0 * peak, 1e-300);
    for (int n = 0; n < N; ++n) inner.p[inner.assign[n]][n] *= std::max(f, 0.0);
  }

  FdmaAllocation out;
  out.alpha0 = alpha0;
  out.alpha1 = alpha1;
  out.p0 = alpha0 > 0.0 ? peak : 0.0;
  out.p = std::move(inner.p);
  out.q = std::move(inner.q);
  out.x.assign(K, std::vector<std::uint8_t>(N, 0));
  out.rates.assign(K, std::vector<double>(N, 0.0));
  out.warning = warning;
  for (int n = 0; n < N; ++n) {
    const int k = inner.assign[n];
    out.x[k][n] = 1;
    out.rates[k][n] = sc_min_rate(inst, k, n, alpha1, out.p[k][n], out.q[k][n], N);
    out.sum_rate += out.rates[k][n];
  }
  return out;
}

struct FdmaDualOutcome {
  FdmaAllocation best_primal;
  double best_dual = kInf;
  int iterations = 0;
  bool converged = false;
};

FdmaDualOutcome fdma_dual_loop(const ChannelInstance& inst,
                               const SystemParams& params,
                               const FdmaLayout& lay,
                               const double* fixed_alpha0) {
  // Ellipsoid over the coupling multipliers [nu..., mu, xi]; every
  // lambda_{k,n} is minimized in closed form inside the inner solve.
  const int K = params.num_pairs;
  const std::size_t q = K + 2;
  const double eta = params.conversion_efficiency;
  const double P = params.total_energy;
  std::vector<double> center(q), radii(q), lo(q, 0.0), hi(q, kInf);
  for (int k = 0; k < K; ++k) {
    radii[k] = 100.0 / (eta * P * inst.g_wpt[k]);
    center[k] = 0.25 * radii[k];
  }
  radii[K] = 200.0;  // time price: bounded by peak spectral efficiency
  center[K] = 20.0;
  radii[K + 1] = 100.0 / P;  // relay energy price
  center[K + 1] = 0.25 * radii[K + 1];
  DualState state = make_dual_state(center, radii, lo, hi);

  FdmaDualOutcome out;
  out.best_primal.sum_rate = -1.0;
  std::vector<double> best_duals;
  const int max_obj = 5000;
  const int min_obj = std::max<int>(400, 20 * static_cast<int>(q));
  const int window = std::max<int>(150, 10 * static_cast<int>(q));
  int obj_iters = 0, last_improve = 0;
  for (int it = 0; it < 40 * max_obj && obj_iters < max_obj; ++it) {
    std::size_t coord = 0;
    bool low = false;
    if (!center_in_box(state, 1e-12, &coord, &low)) {
      std::vector<double> cut(q, 0.0);
      cut[coord] = low ? -1.0 : 1.0;
      try {
        state = ellipsoid_step(state, cut);
      } catch (const ConvergenceFailure&) {
        break;  // collapsed to a point
      }
      continue;
    }
    const auto inner = reduced_inner_solve(inst, params, lay.fixed_assign,
                                           state.multipliers, fixed_alpha0);
    const double g =
        reduced_dual_value(inner, inst, params, state.multipliers);
    ++obj_iters;
    const bool improved =
        g < out.best_dual - 1e-6 * std::max(1.0, std::abs(out.best_dual));
    if (improved) last_improve = obj_iters;
    if (g < out.best_dual) {
      out.best_dual = g;
      best_duals = state.multipliers;
    }
    // Periodic primal recovery: keep the best feasible candidate seen.
    if (obj_iters % 25 == 0 || improved) {
      auto cand = fdma_recover(inner, inst, params, fixed_alpha0);
      if (cand.sum_rate > out.best_primal.sum_rate)
        out.best_primal = std::move(cand);
    }
    if (obj_iters >= min_obj && obj_iters - last_improve >= window) {
      out.converged = true;
      break;
    }
    double max_diag = 0.0;
    for (std::size_t i = 0; i < q; ++i)
      max_diag = std::max(max_diag, state.ellipsoid_shape[i * q + i]);
    if (max_diag < 1e-20) {
      out.converged = true;
      break;
    }
    const auto sub = reduced_subgradient(inner, inst, params);
    try {
      state = ellipsoid_step(state, sub);
    } catch (const ConvergenceFailure&) {
      break;
    }
  }
  out.iterations = obj_iters;
  if (best_duals.empty())
    throw SolverFailure("fdma dual loop produced no feasible dual point");

  // Final recovery at the best dual point.
  const auto inner = reduced_inner_solve(inst, params, lay.fixed_assign,
                                         best_duals, fixed_alpha0);
  auto cand = fdma_recover(inner, inst, params, fixed_alpha0);
  if (cand.sum_rate > out.best_primal.sum_rate)
    out.best_primal = std::move(cand);
  if (out.best_primal.sum_rate < 0.0)
    out.best_primal = fdma_minimal_allocation(inst, params);
  return out;
}

FdmaAllocation solve_fdma_dual(const ChannelInstance& inst,
                               const SystemParams& params,
                               const FdmaLayout& lay,
                               const double* fixed_alpha0,
                               FdmaSolveInfo* info) {
  params.validate();
  auto outcome = fdma_dual_loop(inst, params, lay, fixed_alpha0);
  FdmaAllocation alloc = std::move(outcome.best_primal);
  alloc.duality_gap = (outcome.best_dual - alloc.sum_rate) /
                      std::max(outcome.best_dual, 1e-12);
  if (info) {
    info->dual_objective = outcome.best_dual;
    info->iterations = outcome.iterations;
    info->converged = outcome.converged;
  }
  return alloc;
}

}  // namespace

FdmaAllocation solve_fdma_optimal(const ChannelInstance& inst,
                                  const SystemParams& params,
                                  FdmaSolveInfo* info) {
  const FdmaLayout lay{params.num_pairs, params.num_subcarriers, {}};
  return solve_fdma_dual(inst, params, lay, nullptr, info);
}

FdmaAllocation solve_fdma_eea(const ChannelInstance& inst,
                              const SystemParams& params,
                              FdmaSolveInfo* info) {
  const FdmaLayout lay{params.num_pairs, params.num_subcarriers, {}};
  const double alpha0 = 0.5 * params.total_energy / params.peak_power;
  return solve_fdma_dual(inst, params, lay, &alpha0, info);
}

FdmaAllocation solve_fdma_fsa(const ChannelInstance& inst,
                              const SystemParams& params,
                              FdmaSolveInfo* info) {
  FdmaLayout lay{params.num_pairs, params.num_subcarriers, {}};
  lay.fixed_assign.resize(params.num_subcarriers);
  for (int n = 0; n < params.num_subcarriers; ++n)
    lay.fixed_assign[n] = n % params.num_pairs;
  return solve_fdma_dual(inst, params, lay, nullptr, info);
}

FdmaAllocation solve_fdma_suboptimal(const ChannelInstance& inst,
                                     const SystemParams& params,
                                     double grid_step) {
  params.validate();
  if (!(grid_step > 0.0 && grid_step <= 0.1))
    throw std::invalid_argument("grid_step must be in (0, 0.1]");
  const int K = params.num_pairs, N = params.num_subcarriers;
  const double P = params.total_energy;
  const double peak = params.peak_power;
  const double eta = params.conversion_efficiency;

  // Strongest first hop occupies each subcarrier (ties to the lowest index).
  std::vector<int> assign(N, 0);
  std::vector<int> m_count(K, 0);
  for (int n = 0; n < N; ++n) {
    int best_k = 0;
    for (int k = 1; k < K; ++k)
      if (inst.h1_fdma[k][n] > inst.h1_fdma[best_k][n]) best_k = k;
    assign[n] = best_k;
    ++m_count[best_k];
  }

  const double a0_max = std::min(1.0, P / peak);
  FdmaAllocation best;
  bool found = false;
  const int steps = static_cast<int>(a0_max / grid_step + 1e-9);
  for (int i = 1; i <= steps; ++i) {
    const double a0 = std::min(i * grid_step, a0_max);
    const double a1 = 1.0 - a0;
    if (a1 < 1e-12) break;
    bool covered = true;
    for (int k = 0; k < K; ++k)
      if (eta * a0 * peak * inst.g_wpt[k] < params.processing_cost[k])
        covered = false;
    if (!covered) continue;

    const double p_epa =
        std::min(std::max(2.0 * (P - a0 * peak) / (a1 * N), 0.0), peak);
    FdmaAllocation cand;
    cand.alpha0 = a0;
    cand.alpha1 = a1;
    cand.p0 = peak;
    cand.p.assign(K, std::vector<double>(N, 0.0));
    cand.q.assign(K, std::vector<double>(N, 0.0));
    cand.x.assign(K, std::vector<std::uint8_t>(N, 0));
    cand.rates.assign(K, std::vector<double>(N, 0.0));
    for (int n = 0; n < N; ++n) {
      const int k = assign[n];
      cand.x[k][n] = 1;
      cand.p[k][n] = p_epa;
      const double budget =
          std::max(eta * a0 * peak * inst.g_wpt[k] - params.processing_cost[k],
                   0.0);
      cand.q[k][n] = m_count[k] > 0 ? 2.0 * budget / (a1 * m_count[k]) : 0.0;
      cand.rates[k][n] =
          sc_min_rate(inst, k, n, a1, cand.p[k][n], cand.q[k][n], N);
      cand.sum_rate += cand.rates[k][n];
    }
    if (!found || cand.sum_rate > best.sum_rate) {
      best = std::move(cand);
      found = true;
    }
  }
  if (!found) return fdma_minimal_allocation(inst, params);
  return best;
}

FeasibilityReport check_fdma_feasible(const FdmaAllocation& alloc,
                                      const ChannelInstance& inst,
                                      const SystemParams& params) {
  const int K = params.num_pairs, N = params.num_subcarriers;
  std::ostringstream oss;
  auto fail = [&](const std::string& what) {
    return FeasibilityReport{false, what};
  };
  auto dims_ok = [&](const auto& mat) {
    if (mat.size() != static_cast<std::size_t>(K)) return false;
    for (const auto& row : mat)
      if (row.size() != static_cast<std::size_t>(N)) return false;
    return true;
  };
  if (!dims_ok(alloc.p) || !dims_ok(alloc.q) || !dims_ok(alloc.x) ||
      !dims_ok(alloc.rates))
    return fail("allocation matrix sizes do not match K x N");

  if (!(alloc.alpha0 >= -1e-12 && alloc.alpha0 <= 1.0 + 1e-12) ||
      !(alloc.alpha1 >= -1e-12 && alloc.alpha1 <= 1.0 + 1e-12))
    return fail("alpha out of [0,1]");
  if (alloc.alpha0 + alloc.alpha1 > 1.0 + 1e-9)
    return fail("time budget exceeded");
  if (alloc.p0 < -1e-12 || alloc.p0 > params.peak_power + 1e-12)
    return fail("p0 out of [0, P_peak]");
  if (alloc.duality_gap < -1e-9) return fail("negative duality gap");

  for (int n = 0; n < N; ++n) {
    int users = 0;
    for (int k = 0; k < K; ++k) users += alloc.x[k][n];
    if (users > 1) return fail("subcarrier assigned to multiple pairs");
  }

  double hrn = alloc.alpha0 * alloc.p0;
  for (int k = 0; k < K; ++k)
    for (int n = 0; n < N; ++n) {
      if (alloc.p[k][n] < -1e-12 || alloc.p[k][n] > params.peak_power + 1e-12)
        return fail("forwarding power out of [0, P_peak]");
      if (alloc.q[k][n] < -1e-12) return fail("negative source power");
      hrn += 0.5 * alloc.alpha1 * alloc.p[k][n];
    }
  if (hrn > params.total_energy + 1e-9) {
    oss << "relay energy exceeded: " << hrn;
    return fail(oss.str());
  }

  const double eta = params.conversion_efficiency;
  for (int k = 0; k < K; ++k) {
    double spend = params.processing_cost[k];
    for (int n = 0; n < N; ++n) spend += 0.5 * alloc.alpha1 * alloc.q[k][n];
    if (spend > eta * alloc.alpha0 * alloc.p0 * inst.g_wpt[k] + 1e-12) {
      oss << "energy causality violated at source " << k;
      return fail(oss.str());
    }
  }

  double sum = 0.0;
  for (int k = 0; k < K; ++k)
    for (int n = 0; n < N; ++n) {
      const double want =
          alloc.x[k][n]
              ? sc_min_rate(inst, k, n, alloc.alpha1, alloc.p[k][n],
                            alloc.q[k][n], N)
              : 0.0;
      if (std::abs(want - alloc.rates[k][n]) >
          1e-9 * std::max(1.0, std::abs(want)))
        return fail("stored rate does not match the allocation");
      sum += alloc.rates[k][n];
    }
  if (std::abs(sum - alloc.sum_rate) > 1e-9 * std::max(1.0, sum))
    return fail("sum_rate does not match rates");
  return {};
}

}  // namespace rwpcn
