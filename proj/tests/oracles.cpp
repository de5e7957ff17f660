#include "oracles.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace rwpcn::oracle {

namespace {

constexpr double kLn2 = 0.6931471805599453;

double rate_pair(const ChannelInstance& inst, int k, double alpha, double s,
                 double m) {
  const double sig = inst.noise_power_tdma;
  if (alpha <= 0.0) return 0.0;
  const double r1 =
      0.5 * alpha * std::log2(1.0 + 2.0 * m * inst.h1_tdma[k] / (alpha * sig));
  const double r2 =
      0.5 * alpha * std::log2(1.0 + 2.0 * s * inst.h2_tdma[k] / (alpha * sig));
  return std::min(r1, r2);
}

}  // namespace

double tdma_k1_best_rate(const ChannelInstance& inst,
                         const SystemParams& params, double step) {
  const double P = params.total_energy;
  const double peak = params.peak_power;
  const double eta = params.conversion_efficiency;
  const double cost = params.processing_cost[0];
  const double a0_hi = std::min(1.0, P / peak);

  double best = 0.0;
  const int n0 = static_cast<int>(1.0 / step);
  for (int i = 0; i <= n0; ++i) {
    const double a0 = a0_hi * i / n0;
    const double a1 = 1.0 - a0;
    if (a1 <= 0.0) continue;
    const double s0 = a0 * peak;
    const double harvest = eta * s0 * inst.g_wpt[0];
    if (harvest < cost) continue;  // processing cost not covered: infeasible
    const double m1 = harvest - cost;
    const double s1_cap = std::min(P - s0, 0.5 * a1 * peak);
    if (s1_cap < 0.0) continue;
    for (int j = 0; j <= n0; ++j) {
      const double s1 = s1_cap * j / n0;
      best = std::max(best, rate_pair(inst, 0, a1, s1, m1));
    }
  }
  return best;
}

double fdma_k2n2_best_rate(const ChannelInstance& inst,
                           const SystemParams& params, double step) {
  const int N = 2;
  const double P = params.total_energy;
  const double peak = params.peak_power;
  const double eta = params.conversion_efficiency;
  const double sig = inst.noise_power_fdma;

  auto sc_rate = [&](int k, int n, double a1, double p, double q) {
    if (a1 <= 0.0) return 0.0;
    const double r1 = std::log2(1.0 + q * inst.h1_fdma[k][n] / sig);
    const double r2 = std::log2(1.0 + p * inst.h2_fdma[k][n] / sig);
    return a1 / (2.0 * N) * std::min(r1, r2);
  };

  const int g = static_cast<int>(1.0 / step);
  double best = 0.0;
  // owner[n] in {-1, 0, 1}
  for (int o0 = -1; o0 <= 1; ++o0)
    for (int o1 = -1; o1 <= 1; ++o1) {
      const std::array<int, 2> owner{o0, o1};
      for (int i = 1; i <= g; ++i) {
        const double a0 = std::min(1.0, P / peak) * i / g;
        const double a1 = 1.0 - a0;
        if (a1 <= 0.0) continue;
        const double s0 = a0 * peak;
        bool covered = true;
        for (int k = 0; k < 2; ++k)
          if (eta * s0 * inst.g_wpt[k] < params.processing_cost[k])
            covered = false;
        if (!covered) continue;

        const double e_relay = P - s0;  // energy for forwarding
        std::array<double, 2> e_src{};  // per-source WIT energy budget
        for (int k = 0; k < 2; ++k)
          e_src[k] = std::max(
              eta * s0 * inst.g_wpt[k] - params.processing_cost[k], 0.0);

        // Split relay energy between the assigned subcarriers, and each
        // source's energy across the subcarriers it owns.
        const int assigned =
            (owner[0] >= 0 ? 1 : 0) + (owner[1] >= 0 ? 1 : 0);
        if (assigned == 0) continue;
        for (int t = 0; t <= g; ++t) {
          const double fp = assigned == 1 ? 1.0 : t / double(g);
          std::array<double, 2> ep{};
          if (owner[0] >= 0 && owner[1] >= 0) {
            ep = {fp * e_relay, (1.0 - fp) * e_relay};
          } else if (owner[0] >= 0) {
            ep = {e_relay, 0.0};
          } else {
            ep = {0.0, e_relay};
          }
          const bool same_owner = owner[0] >= 0 && owner[0] == owner[1];
          const int uq = same_owner ? g : 0;
          for (int u = 0; u <= uq; ++u) {
            std::array<double, 2> eq{};
            if (same_owner) {
              eq = {u / double(g) * e_src[owner[0]],
                    (1.0 - u / double(g)) * e_src[owner[0]]};
            } else {
              if (owner[0] >= 0) eq[0] = e_src[owner[0]];
              if (owner[1] >= 0) eq[1] = e_src[owner[1]];
            }
            double sum = 0.0;
            for (int n = 0; n < 2; ++n) {
              if (owner[n] < 0) continue;
              const double p =
                  std::min(2.0 * ep[n] / a1, peak);  // clamp wastes surplus
              const double q = 2.0 * eq[n] / a1;
              sum += sc_rate(owner[n], n, a1, p, q);
            }
            best = std::max(best, sum);
          }
          if (assigned == 1) break;  // no relay split dimension
        }
      }
    }
  return best;
}

double tdma_energy_grid_max(const ChannelInstance& inst,
                            const SystemParams& params,
                            std::span<const double> duals, int k, double alpha,
                            int grid) {
  const double s_hi = 0.5 * alpha * params.peak_power;
  const double m_hi = tdma_harvest_caps(inst, params)[k];
  double best = -1e300;
  for (int i = 0; i <= grid; ++i)
    for (int j = 0; j <= grid; ++j) {
      const double s = s_hi * i / grid;
      const double m = m_hi * j / grid;
      best = std::max(best,
                      tdma_pair_lagrangian(inst, params, duals, k, s, m, alpha));
    }
  return best;
}

double tdma_alpha_grid_argmax(const ChannelInstance& inst,
                              const SystemParams& params,
                              std::span<const double> duals, int k, double s,
                              double m, double step) {
  double best = -1e300, arg = step;
  const double lo = std::max(step, 2.0 * s / params.peak_power);
  for (double a = lo; a <= 1.0 + 1e-12; a += step) {
    const double aa = std::min(a, 1.0);
    const double v = tdma_pair_lagrangian(inst, params, duals, k, s, m, aa);
    if (v > best) {
      best = v;
      arg = aa;
    }
  }
  return arg;
}

double fdma_sc_grid_max(const ChannelInstance& inst, const SystemParams& params,
                        std::span<const double> duals, int k, int n,
                        int grid) {
  const int K = params.num_pairs, N = params.num_subcarriers;
  const double sig = inst.noise_power_fdma;
  const double lam = duals[k * N + n];
  const double nu = duals[K * N + k];
  const double xi = duals[K * N + K + 1];
  // q range: a generous multiple of the analytic optimum.
  const double q_opt =
      nu > 0.0 ? std::max(lam / (nu * N * kLn2) - sig / inst.h1_fdma[k][n], 0.0)
               : 1.0;
  const double q_hi = 4.0 * q_opt + 1.0;
  double best = -1e300;
  for (int i = 0; i <= grid; ++i)
    for (int j = 0; j <= grid; ++j) {
      const double p = params.peak_power * i / grid;
      const double q = q_hi * j / grid;
      const double r1 = std::log2(1.0 + q * inst.h1_fdma[k][n] / sig) / (2.0 * N);
      const double r2 = std::log2(1.0 + p * inst.h2_fdma[k][n] / sig) / (2.0 * N);
      const double v =
          lam * r1 + (1.0 - lam) * r2 - 0.5 * (xi * p + nu * q);
      best = std::max(best, v);
    }
  return best;
}

}  // namespace rwpcn::oracle
