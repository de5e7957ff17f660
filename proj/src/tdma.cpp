#include "rwpcn/tdma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rwpcn/numerics.hpp"

namespace rwpcn {

namespace {

constexpr double kLn2 = 0.6931471805599453;
constexpr double kAlphaFloor = 1e-6;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct DualView {
  std::span<const double> v;
  int K;
  double lambda(int k) const { return v[k]; }
  double nu(int k) const { return v[K + k]; }
  double mu() const { return v[2 * K]; }
  double xi() const { return v[2 * K + 1]; }
};

// xi minus the value later pairs place on relay energy spent now.
double price_s(const DualView& d, const ChannelInstance& inst, double eta,
               int k) {
  double tail = 0.0;
  for (int i = k + 1; i < d.K; ++i) tail += d.nu(i) * inst.g_wpt[i];
  return d.xi() - eta * tail;
}

// nu_k minus the value later pairs place on source-k energy spent now.
double price_m(const DualView& d, const ChannelInstance& inst, double eta,
               int k) {
  double tail = 0.0;
  for (int i = k + 1; i < d.K; ++i) tail += d.nu(i) * inst.g_ss[k][i];
  return d.nu(k) - eta * tail;
}

// d/dalpha of (alpha/2) log2(1 + 2 e g / (alpha sigma2)) at fixed energy e.
double half_slot_rate_dalpha(double alpha, double energy, double gain,
                             double sigma2) {
  if (energy <= 0.0) return 0.0;
  const double c = 2.0 * energy * gain / sigma2;
  return 0.5 * std::log2(1.0 + c / alpha) - c / (2.0 * kLn2 * (alpha + c));
}

}  // namespace

double half_slot_rate(double alpha, double energy, double gain,
                      double sigma2) {
  if (alpha <= 0.0 || energy <= 0.0) return 0.0;
  return 0.5 * alpha * std::log2(1.0 + 2.0 * energy * gain / (alpha * sigma2));
}

std::vector<double> tdma_harvest_caps(const ChannelInstance& inst,
                                      const SystemParams& params) {
  const int K = params.num_pairs;
  const double eta = params.conversion_efficiency;
  std::vector<double> caps(K);
  for (int k = 0; k < K; ++k) {
    double from_sources = 0.0;
    for (int i = 0; i < k; ++i) from_sources += caps[i] * inst.g_ss[i][k];
    caps[k] = eta * (params.total_energy * inst.g_wpt[k] + from_sources);
  }
  return caps;
}

std::pair<double, double> inner_energy_allocation(
    const ChannelInstance& inst, const SystemParams& params, double alpha_k,
    std::span<const double> duals, int k) {
  const DualView d{duals, params.num_pairs};
  const double eta = params.conversion_efficiency;
  const double sigma2 = inst.noise_power_tdma;
  const double lam = d.lambda(k);

  const double ps = price_s(d, inst, eta, k);
  double p_hat;  // relay power for pair k
  if (ps <= 0.0) {
    p_hat = params.peak_power;
  } else {
    p_hat = std::min(
        std::max((1.0 - lam) / (ps * kLn2) - sigma2 / inst.h2_tdma[k], 0.0),
        params.peak_power);
  }
  const double s_k = 0.5 * alpha_k * p_hat;

  const double cap = tdma_harvest_caps(inst, params)[k];
  const double pm = price_m(d, inst, eta, k);
  double m_k;
  if (pm <= 0.0) {
    m_k = cap;
  } else {
    const double q_hat =
        std::max(lam / (pm * kLn2) - sigma2 / inst.h1_tdma[k], 0.0);
    m_k = std::min(0.5 * alpha_k * q_hat, cap);
  }
  return {s_k, m_k};
}

double tdma_alpha_derivative(const ChannelInstance& inst,
                             const SystemParams& params,
                             std::span<const double> duals, int k, double s,
                             double m, double alpha) {
  const DualView d{duals, params.num_pairs};
  const double sigma2 = inst.noise_power_tdma;
  return d.lambda(k) * half_slot_rate_dalpha(alpha, m, inst.h1_tdma[k], sigma2) +
         (1.0 - d.lambda(k)) *
             half_slot_rate_dalpha(alpha, s, inst.h2_tdma[k], sigma2) -
         d.mu();
}

double inner_time_allocation(const ChannelInstance& inst,
                             const SystemParams& params, double s_k, double m_k,
                             std::span<const double> duals, int k,
                             double alpha_lo) {
  // Keep s_k <= (alpha/2) P_peak valid while the energies stay fixed.
  double lo = std::max(alpha_lo, 2.0 * s_k / params.peak_power);
  if (lo >= 1.0) return 1.0;
  auto f = [&](double a) {
    return tdma_alpha_derivative(inst, params, duals, k, s_k, m_k, a);
  };
  return bisect(f, lo, 1.0, 1e-11);
}

double tdma_pair_lagrangian(const ChannelInstance& inst,
                            const SystemParams& params,
                            std::span<const double> duals, int k, double s,
                            double m, double alpha) {
  const DualView d{duals, params.num_pairs};
  const double eta = params.conversion_efficiency;
  const double sigma2 = inst.noise_power_tdma;
  const double r1 = half_slot_rate(alpha, m, inst.h1_tdma[k], sigma2);
  const double r2 = half_slot_rate(alpha, s, inst.h2_tdma[k], sigma2);
  return d.lambda(k) * r1 + (1.0 - d.lambda(k)) * r2 - d.mu() * alpha -
         price_s(d, inst, eta, k) * s - price_m(d, inst, eta, k) * m;
}

TdmaInnerPoint inner_bcd(const ChannelInstance& inst,
                         const SystemParams& params,
                         std::span<const double> duals, int k, double tol,
                         int max_rounds) {
  TdmaInnerPoint pt;
  pt.alpha = 1.0 / params.num_pairs;
  double l_prev = -kInf;
  pt.converged = false;
  for (int round = 0; round < max_rounds; ++round) {
    auto [s, m] = inner_energy_allocation(inst, params, pt.alpha, duals, k);
    pt.s = s;
    pt.m = m;
    pt.alpha = inner_time_allocation(inst, params, s, m, duals, k);
    const double l = tdma_pair_lagrangian(inst, params, duals, k, s, m, pt.alpha);
    if (l - l_prev < tol) {
      pt.converged = true;
      l_prev = l;
      break;
    }
    l_prev = l;
  }
  // Make the energy block stationary at the final alpha.
  auto [s, m] = inner_energy_allocation(inst, params, pt.alpha, duals, k);
  pt.s = s;
  pt.m = m;
  pt.lagrangian = tdma_pair_lagrangian(inst, params, duals, k, s, m, pt.alpha);
  return pt;
}

namespace {

// Exact maximizer of the pair Lagrangian over {0<=alpha<=1,
// 0<=s<=alpha/2 P_peak, 0<=m<=cap}. At the optimal powers the Lagrangian is
// linear in alpha until the harvest cap binds, then concave.
TdmaInnerPoint exact_pair_inner(const ChannelInstance& inst,
                                const SystemParams& params,
                                std::span<const double> duals, int k,
                                double cap) {
  const DualView d{duals, params.num_pairs};
  const double eta = params.conversion_efficiency;
  const double sigma2 = inst.noise_power_tdma;
  const double lam = d.lambda(k);
  const double h1 = inst.h1_tdma[k], h2 = inst.h2_tdma[k];

  const double ps = price_s(d, inst, eta, k);
  const double p_hat =
      ps <= 0.0 ? params.peak_power
                : std::min(std::max((1.0 - lam) / (ps * kLn2) - sigma2 / h2, 0.0),
                           params.peak_power);
  // Relay-side contribution per unit alpha.
  const double cs = (1.0 - lam) * 0.5 * std::log2(1.0 + p_hat * h2 / sigma2) -
                    0.5 * ps * p_hat;

  const double pm = price_m(d, inst, eta, k);
  const double q_hat =
      pm <= 0.0 ? kInf : std::max(lam / (pm * kLn2) - sigma2 / h1, 0.0);

  TdmaInnerPoint best;  // value 0 at the all-off point
  best.converged = true;
  auto consider = [&](double alpha, double m, double value) {
    if (value > best.lagrangian) {
      best.alpha = alpha;
      best.s = 0.5 * alpha * p_hat;
      best.m = m;
      best.lagrangian = value;
    }
  };

  const double alpha_cap = q_hat <= 0.0 ? kInf
                           : std::isinf(q_hat) ? 0.0
                                               : 2.0 * cap / q_hat;
  if (alpha_cap >= 1.0) {
    // Pure linear segment: bang-bang in alpha.
    const double cm = q_hat <= 0.0
                          ? 0.0
                          : lam * 0.5 * std::log2(1.0 + q_hat * h1 / sigma2) -
                                0.5 * pm * q_hat;
    consider(1.0, 0.5 * q_hat, cs + cm - d.mu());
    return best;
  }

  // Value at the end of the linear segment (m just reaching the cap).
  if (alpha_cap > 0.0) {
    const double cm = lam * 0.5 * std::log2(1.0 + q_hat * h1 / sigma2) -
                      0.5 * pm * q_hat;
    consider(alpha_cap, cap, alpha_cap * (cs + cm - d.mu()));
  }

  // Concave segment with m pinned at the cap.
  auto seg_value = [&](double a) {
    return lam * half_slot_rate(a, cap, h1, sigma2) + a * (cs - d.mu()) -
           pm * cap;
  };
  auto seg_deriv = [&](double a) {
    return lam * half_slot_rate_dalpha(a, cap, h1, sigma2) + cs - d.mu();
  };
  const double lo = std::max(alpha_cap, 1e-12);
  const double a2 = bisect(seg_deriv, lo, 1.0, 1e-12);
  consider(a2, cap, seg_value(a2));
  consider(1.0, cap, seg_value(1.0));
  // alpha -> 0 limit of the capped segment (rate term vanishes).
  consider(0.0, cap, -pm * cap);
  return best;
}

}  // namespace

std::pair<double, double> wpt_slot_decision(std::span<const double> duals,
                                            const SystemParams& params,
                                            const ChannelInstance& inst) {
  const DualView d{duals, params.num_pairs};
  const double eta = params.conversion_efficiency;
  double w = 0.0;
  for (int i = 0; i < d.K; ++i) w += d.nu(i) * inst.g_wpt[i];
  w *= eta;
  const double alpha0 =
      (-d.mu() - d.xi() * params.peak_power + w * params.peak_power > 0.0)
          ? 1.0
          : 0.0;
  const double s0 = (w - d.xi() > 0.0) ? alpha0 * params.peak_power : 0.0;
  return {s0, alpha0};
}

TdmaInnerSolution tdma_inner_solve(const ChannelInstance& inst,
                                   const SystemParams& params,
                                   std::span<const double> duals,
                                   const double* fixed_s0,
                                   const double* fixed_alpha0, double) {
  const int K = params.num_pairs;
  const auto caps = tdma_harvest_caps(inst, params);
  TdmaInnerSolution sol;
  sol.alpha.resize(K);
  sol.s.resize(K);
  sol.m.resize(K);
  for (int k = 0; k < K; ++k) {
    const auto pt = exact_pair_inner(inst, params, duals, k, caps[k]);
    sol.alpha[k] = pt.alpha;
    sol.s[k] = pt.s;
    sol.m[k] = pt.m;
    if (!pt.converged) sol.warning = true;
  }
  if (fixed_s0 && fixed_alpha0) {
    sol.s0 = *fixed_s0;
    sol.alpha0 = *fixed_alpha0;
  } else {
    std::tie(sol.s0, sol.alpha0) = wpt_slot_decision(duals, params, inst);
  }
  return sol;
}

double tdma_dual_value(const TdmaInnerSolution& inner,
                       const ChannelInstance& inst, const SystemParams& params,
                       std::span<const double> duals) {
  const DualView d{duals, params.num_pairs};
  const double eta = params.conversion_efficiency;
  double g = d.mu() + d.xi() * params.total_energy;
  for (int k = 0; k < d.K; ++k) {
    g -= d.nu(k) * params.processing_cost[k];
    g += tdma_pair_lagrangian(inst, params, duals, k, inner.s[k], inner.m[k],
                              inner.alpha[k]);
  }
  double w = 0.0;
  for (int i = 0; i < d.K; ++i) w += d.nu(i) * inst.g_wpt[i];
  g += -d.mu() * inner.alpha0 - d.xi() * inner.s0 + eta * w * inner.s0;
  return g;
}

std::vector<double> tdma_subgradient(const TdmaInnerSolution& inner,
                                     const ChannelInstance& inst,
                                     const SystemParams& params) {
  const int K = params.num_pairs;
  const double eta = params.conversion_efficiency;
  const double sigma2 = inst.noise_power_tdma;
  std::vector<double> g(2 * K + 2);
  double alpha_sum = inner.alpha0, s_sum = inner.s0;
  for (int k = 0; k < K; ++k) {
    alpha_sum += inner.alpha[k];
    s_sum += inner.s[k];
    g[k] = half_slot_rate(inner.alpha[k], inner.m[k], inst.h1_tdma[k], sigma2) -
           half_slot_rate(inner.alpha[k], inner.s[k], inst.h2_tdma[k], sigma2);
    // Harvested energy accumulated from the WPT slot and earlier pairs.
    double harvested = inner.s0 * inst.g_wpt[k];
    for (int i = 0; i < k; ++i)
      harvested += inner.s[i] * inst.g_wpt[k] + inner.m[i] * inst.g_ss[i][k];
    g[K + k] = eta * harvested - params.processing_cost[k] - inner.m[k];
  }
  g[2 * K] = 1.0 - alpha_sum;
  g[2 * K + 1] = params.total_energy - s_sum;
  return g;
}

// ---------------------------------------------------------------------------
// Primal recovery
// ---------------------------------------------------------------------------

namespace {

double tdma_pair_rate(const ChannelInstance& inst, double alpha, double s,
                      double m, int k) {
  const double sigma2 = inst.noise_power_tdma;
  return std::min(half_slot_rate(alpha, m, inst.h1_tdma[k], sigma2),
                  half_slot_rate(alpha, s, inst.h2_tdma[k], sigma2));
}

// Cap each m to the energy actually harvestable given s0 and the earlier
// pairs; returns false if some processing cost cannot be covered.
bool recap_m(std::vector<double>& m, const std::vector<double>& s, double s0,
             const ChannelInstance& inst, const SystemParams& params) {
  const int K = params.num_pairs;
  const double eta = params.conversion_efficiency;
  for (int k = 0; k < K; ++k) {
    double harvested = s0 * inst.g_wpt[k];
    for (int i = 0; i < k; ++i)
      harvested += s[i] * inst.g_wpt[k] + m[i] * inst.g_ss[i][k];
    const double budget = eta * harvested - params.processing_cost[k];
    if (budget < -1e-15) return false;
    m[k] = std::clamp(m[k], 0.0, std::max(budget, 0.0));
  }
  return true;
}

}  // namespace

double tdma_terminal_s0(const ChannelInstance& inst, const SystemParams& params,
                        std::span<const double> alpha, std::span<const double> s,
                        std::span<const double> m) {
  const int K = params.num_pairs;
  const double eta = params.conversion_efficiency;
  double alpha_sum = 0.0, s_sum = 0.0;
  for (int k = 0; k < K; ++k) {
    alpha_sum += alpha[k];
    s_sum += s[k];
  }
  std::vector<HalfPlane> cons;
  for (int k = 0; k < K; ++k) {
    // m_k + E^c_k <= eta (s0 + sum_earlier s) g_wpt + eta sum_earlier m g_ss
    double side = 0.0;
    for (int i = 0; i < k; ++i)
      side += s[i] * inst.g_wpt[k] + m[i] * inst.g_ss[i][k];
    const double need =
        (m[k] + params.processing_cost[k]) / eta - side;  // s0 g_wpt >= need
    cons.push_back({-inst.g_wpt[k], 0.0, -need});
  }
  cons.push_back({1.0, 0.0, params.total_energy - s_sum});
  cons.push_back({1.0, 0.0, std::max(1.0 - alpha_sum, 0.0) * params.peak_power});
  const auto x = solve_tiny_lp({-1.0, 0.0}, cons, {0.0, 0.0},
                               {params.total_energy, 0.0}, 1);
  return x[0];
}

namespace {

// Shared repair tail: takes rough WIT-slot values plus either a free WPT slot
// (recovered by the terminal LP, charged at peak power) or a pinned one, and
// returns a feasible allocation.
TdmaAllocation tdma_repair(std::vector<double> alpha, std::vector<double> s,
                           std::vector<double> m, const double* fixed_s0,
                           const double* fixed_alpha0,
                           const ChannelInstance& inst,
                           const SystemParams& params, bool warning) {
  const int K = params.num_pairs;
  const double P = params.total_energy;
  const double peak = params.peak_power;

  for (int k = 0; k < K; ++k) {
    alpha[k] = std::clamp(alpha[k], 0.0, 1.0);
    s[k] = std::max(s[k], 0.0);
    m[k] = std::max(m[k], 0.0);
  }
  const double alpha0_reserve = fixed_alpha0 ? *fixed_alpha0 : 0.0;

  auto normalize = [&]() {
    double alpha_sum = 0.0;
    for (int k = 0; k < K; ++k) alpha_sum += alpha[k];
    if (alpha_sum > 1.0 - alpha0_reserve && alpha_sum > 0.0) {
      const double f = (1.0 - alpha0_reserve) / alpha_sum;
      for (int k = 0; k < K; ++k) alpha[k] *= f;
    }
    for (int k = 0; k < K; ++k) s[k] = std::min(s[k], 0.5 * alpha[k] * peak);
    const double s_budget = P - (fixed_s0 ? *fixed_s0 : 0.0);
    double s_sum = 0.0;
    for (int k = 0; k < K; ++k) s_sum += s[k];
    if (s_sum > s_budget && s_sum > 0.0) {
      const double f = std::max(s_budget, 0.0) / s_sum;
      for (int k = 0; k < K; ++k) s[k] *= f;
    }
  };

  auto choose_s0 = [&](double& s0, double& alpha0) {
    if (fixed_s0) {
      s0 = *fixed_s0;
      alpha0 = *fixed_alpha0;
      return;
    }
    double alpha_sum = 0.0, s_sum = 0.0;
    for (int k = 0; k < K; ++k) {
      alpha_sum += alpha[k];
      s_sum += s[k];
    }
    const double cap =
        std::max(std::min(P - s_sum, (1.0 - alpha_sum) * peak), 0.0);
    try {
      s0 = tdma_terminal_s0(inst, params, alpha, s, m);
    } catch (const LpInfeasible&) {
      s0 = cap;  // charge as much as possible; the chain re-cap shrinks m
      warning = true;
    }
    alpha0 = s0 > 0.0 ? s0 / peak : 0.0;
  };

  double s0 = 0.0, alpha0 = 0.0;
  for (int attempt = 0; attempt < 3; ++attempt) {
    normalize();
    choose_s0(s0, alpha0);
    if (recap_m(m, s, s0, inst, params)) break;
    if (attempt == 2)
      throw SolverFailure("tdma repair: processing costs cannot be covered");
    // Processing cost uncovered even at the chosen s0: free time and energy.
    warning = true;
    for (int k = 0; k < K; ++k) {
      alpha[k] *= 0.5;
      s[k] *= 0.5;
      m[k] *= 0.5;
    }
  }

  // Switch off slots that carry no rate; dropping one removes its harvest
  // contribution, so re-cap until the chain settles (at most K rounds).
  for (int round = 0; round <= K; ++round) {
    bool zeroed = false;
    for (int k = 0; k < K; ++k) {
      const double r = tdma_pair_rate(inst, alpha[k], s[k], m[k], k);
      if ((alpha[k] < 1e-5 && r < 1e-9) || r <= 0.0) {
        if (alpha[k] != 0.0 || s[k] != 0.0 || m[k] != 0.0) zeroed = true;
        alpha[k] = 0.0;
        s[k] = 0.0;
        m[k] = 0.0;
      }
    }
    if (!zeroed) break;
    if (!fixed_s0) choose_s0(s0, alpha0);
    if (!recap_m(m, s, s0, inst, params)) {
      // A later pair lost the harvest it relied on: charge at the cap.
      double alpha_sum = 0.0, s_sum = 0.0;
      for (int k = 0; k < K; ++k) {
        alpha_sum += alpha[k];
        s_sum += s[k];
      }
      if (fixed_s0 ||
          !(s0 = std::max(std::min(P - s_sum, (1.0 - alpha_sum) * peak), 0.0),
            alpha0 = s0 > 0.0 ? s0 / peak : 0.0,
            recap_m(m, s, s0, inst, params)))
        throw SolverFailure("tdma repair: harvest chain cannot be restored");
      warning = true;
    }
  }

  // Spread the WIT slots over any remaining time (energies fixed, so every
  // constraint only loosens).
  double alpha_sum = 0.0;
  for (int k = 0; k < K; ++k) alpha_sum += alpha[k];
  const double t_wit = 1.0 - alpha0;
  if (alpha_sum > 0.0 && alpha_sum < t_wit) {
    const double f = t_wit / alpha_sum;
    for (int k = 0; k < K; ++k) alpha[k] *= f;
  } else if (alpha_sum > t_wit + 1e-15 && alpha_sum > 0.0) {
    const double f = std::max(t_wit, 0.0) / alpha_sum;
    for (int k = 0; k < K; ++k) {
      alpha[k] *= f;
      s[k] = std::min(s[k], 0.5 * alpha[k] * peak);
    }
  }

  TdmaAllocation out;
  out.alpha.assign(K + 1, 0.0);
  out.s.assign(K + 1, 0.0);
  out.m = m;
  out.rates.resize(K);
  out.alpha[0] = alpha0;
  out.s[0] = s0;
  out.warning = warning;
  for (int k = 0; k < K; ++k) {
    out.alpha[k + 1] = alpha[k];
    out.s[k + 1] = s[k];
    out.rates[k] = tdma_pair_rate(inst, alpha[k], s[k], m[k], k);
    out.sum_rate += out.rates[k];
  }
  const auto rep = check_tdma_feasible(out, inst, params);
  if (!rep.ok)
    throw SolverFailure("tdma repair produced an infeasible allocation: " +
                        rep.detail);
  return out;
}

// Zero-rate allocation that still covers every processing cost.
TdmaAllocation tdma_minimal_allocation(const ChannelInstance& inst,
                                       const SystemParams& params) {
  const int K = params.num_pairs;
  double s0 = 0.0;
  for (int k = 0; k < K; ++k)
    s0 = std::max(s0, params.processing_cost[k] /
                          (params.conversion_efficiency * inst.g_wpt[k]));
  s0 *= 1.0 + 1e-12;
  if (s0 > std::min(params.total_energy, params.peak_power))
    throw SolverFailure("instance cannot cover processing costs");
  TdmaAllocation out;
  out.alpha.assign(K + 1, 0.0);
  out.s.assign(K + 1, 0.0);
  out.m.assign(K, 0.0);
  out.rates.assign(K, 0.0);
  out.alpha[0] = s0 > 0.0 ? s0 / params.peak_power : 0.0;
  out.s[0] = s0;
  out.warning = true;
  return out;
}

// Recovery candidate A: Algorithm-1 style, WIT slots from the BCD inner
// points at the given multipliers.
TdmaAllocation recover_from_bcd(const ChannelInstance& inst,
                                const SystemParams& params,
                                std::span<const double> duals,
                                const double* fixed_s0,
                                const double* fixed_alpha0) {
  const int K = params.num_pairs;
  std::vector<double> alpha(K), s(K), m(K);
  bool warn = false;
  for (int k = 0; k < K; ++k) {
    const auto pt = inner_bcd(inst, params, duals, k);
    alpha[k] = pt.alpha;
    s[k] = pt.s;
    m[k] = pt.m;
    if (!pt.converged) warn = true;
  }
  return tdma_repair(std::move(alpha), std::move(s), std::move(m), fixed_s0,
                     fixed_alpha0, inst, params, warn);
}

// Recovery candidate B: keep the per-pair powers from the closed forms and
// size each WIT slot so its source spends exactly what it harvested; the WPT
// energy closes the time (or relay-energy) budget.
TdmaAllocation recover_energy_tight(const ChannelInstance& inst,
                                    const SystemParams& params,
                                    std::span<const double> duals,
                                    const double* fixed_s0,
                                    const double* fixed_alpha0) {
  const int K = params.num_pairs;
  const double eta = params.conversion_efficiency;
  const double sigma2 = inst.noise_power_tdma;
  std::vector<double> p_hat(K), q_hat(K);
  std::vector<bool> active(K);
  for (int k = 0; k < K; ++k) {
    auto [s_half, m_half] = inner_energy_allocation(inst, params, 1.0, duals, k);
    p_hat[k] = 2.0 * s_half;
    q_hat[k] = 2.0 * m_half;
    const double r1 = 0.5 * std::log2(1.0 + q_hat[k] * inst.h1_tdma[k] / sigma2);
    const double r2 = 0.5 * std::log2(1.0 + p_hat[k] * inst.h2_tdma[k] / sigma2);
    active[k] = q_hat[k] > 0.0 && p_hat[k] > 0.0 && std::min(r1, r2) > 0.0;
  }

  // Chain the slots: alpha_k spends the pair's harvest at power q_hat.
  auto build = [&](double s0, std::vector<double>* alpha_out,
                   std::vector<double>* s_out, std::vector<double>* m_out) {
    double t_used = s0 / params.peak_power;
    double e_used = s0;
    std::vector<double> a(K, 0.0), ss(K, 0.0), mm(K, 0.0);
    for (int k = 0; k < K; ++k) {
      if (!active[k]) continue;
      double harvested = s0 * inst.g_wpt[k];
      for (int i = 0; i < k; ++i)
        harvested += ss[i] * inst.g_wpt[k] + mm[i] * inst.g_ss[i][k];
      const double budget = eta * harvested - params.processing_cost[k];
      if (budget <= 0.0) continue;
      a[k] = std::min(2.0 * budget / q_hat[k], 1.0);
      mm[k] = 0.5 * a[k] * q_hat[k];
      ss[k] = 0.5 * a[k] * p_hat[k];
      t_used += a[k];
      e_used += ss[k];
    }
    if (alpha_out) {
      *alpha_out = std::move(a);
      *s_out = std::move(ss);
      *m_out = std::move(mm);
    }
    return std::pair{t_used, e_used};
  };

  double s0;
  if (fixed_s0) {
    s0 = *fixed_s0;
  } else {
    const double s0_max = std::min(params.total_energy, params.peak_power);
    auto time_slack = [&](double x) { return 1.0 - build(x, nullptr, nullptr, nullptr).first; };
    auto energy_slack = [&](double x) {
      return params.total_energy - build(x, nullptr, nullptr, nullptr).second;
    };
    s0 = s0_max;
    if (time_slack(s0_max) < 0.0) s0 = bisect(time_slack, 0.0, s0_max, 1e-12);
    if (energy_slack(s0) < 0.0) s0 = bisect(energy_slack, 0.0, s0, 1e-12);
  }
  std::vector<double> alpha, s, m;
  build(s0, &alpha, &s, &m);
  return tdma_repair(std::move(alpha), std::move(s), std::move(m),
                     fixed_s0 ? &s0 : nullptr, fixed_alpha0, inst, params,
                     false);
}

struct TdmaDualOutcome {
  std::vector<double> best_multipliers;
  double best_dual = kInf;
  int iterations = 0;
  bool converged = false;
};

// Initial ellipsoid sized to the problem scale: the energy prices behave
// like 1/(harvestable joules), so fixed radii cannot cover both strong and
// weak instances.
DualState tdma_initial_state(const ChannelInstance& inst,
                             const SystemParams& params) {
  const int K = params.num_pairs;
  const std::size_t q = 2 * K + 2;
  const double eta = params.conversion_efficiency;
  const double P = params.total_energy;
  std::vector<double> center(q), radii(q), lo(q, 0.0), hi(q, kInf);
  for (int k = 0; k < K; ++k) {
    center[k] = 0.5;
    radii[k] = 1.0;
    hi[k] = 1.0;
    radii[K + k] = 100.0 / (eta * P * inst.g_wpt[k]);
    center[K + k] = 0.25 * radii[K + k];
  }
  radii[2 * K] = 200.0;  // time price: bounded by peak spectral efficiency
  center[2 * K] = 20.0;
  radii[2 * K + 1] = 100.0 / P;  // relay energy price
  center[2 * K + 1] = 0.25 * radii[2 * K + 1];
  return make_dual_state(center, radii, lo, hi);
}

TdmaDualOutcome tdma_dual_loop(const ChannelInstance& inst,
                               const SystemParams& params,
                               const double* fixed_s0,
                               const double* fixed_alpha0) {
  const std::size_t q = 2 * params.num_pairs + 2;
  DualState state = tdma_initial_state(inst, params);

  TdmaDualOutcome out;
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
    const auto inner = tdma_inner_solve(inst, params, state.multipliers,
                                        fixed_s0, fixed_alpha0);
    const double g =
        tdma_dual_value(inner, inst, params, state.multipliers);
    ++obj_iters;
    if (g < out.best_dual - 1e-6 * std::max(1.0, std::abs(out.best_dual)))
      last_improve = obj_iters;
    if (g < out.best_dual) {
      out.best_dual = g;
      out.best_multipliers = state.multipliers;
    }
    if (obj_iters >= min_obj && obj_iters - last_improve >= window) {
      out.converged = true;
      break;
    }
    // Collapsed ellipsoid: every axis is numerically a point.
    double max_diag = 0.0;
    for (std::size_t i = 0; i < q; ++i)
      max_diag = std::max(max_diag, state.ellipsoid_shape[i * q + i]);
    if (max_diag < 1e-20) {
      out.converged = true;
      break;
    }
    const auto sub = tdma_subgradient(inner, inst, params);
    try {
      state = ellipsoid_step(state, sub);
    } catch (const ConvergenceFailure&) {
      break;
    }
  }
  out.iterations = obj_iters;
  if (out.best_multipliers.empty())
    throw SolverFailure("tdma dual loop produced no feasible dual point");
  return out;
}

TdmaAllocation solve_tdma_dual(const ChannelInstance& inst,
                               const SystemParams& params,
                               const double* fixed_s0,
                               const double* fixed_alpha0,
                               TdmaSolveInfo* info) {
  if (inst.g_wpt.size() != static_cast<std::size_t>(params.num_pairs))
    throw SolverFailure("instance does not match num_pairs");
  const auto outcome = tdma_dual_loop(inst, params, fixed_s0, fixed_alpha0);

  TdmaAllocation best;
  best.sum_rate = -1.0;
  auto consider = [&](TdmaAllocation cand) {
    if (cand.sum_rate > best.sum_rate) best = std::move(cand);
  };
  consider(recover_from_bcd(inst, params, outcome.best_multipliers, fixed_s0,
                            fixed_alpha0));
  consider(recover_energy_tight(inst, params, outcome.best_multipliers,
                                fixed_s0, fixed_alpha0));
  if (best.sum_rate <= 0.0) consider(tdma_minimal_allocation(inst, params));

  if (info) {
    info->dual_objective = outcome.best_dual;
    info->duality_gap = outcome.best_dual - best.sum_rate;
    info->iterations = outcome.iterations;
    info->converged = outcome.converged;
  }
  return best;
}

}  // namespace

TdmaAllocation solve_tdma_optimal(const ChannelInstance& inst,
                                  const SystemParams& params,
                                  TdmaSolveInfo* info) {
  params.validate();
  return solve_tdma_dual(inst, params, nullptr, nullptr, info);
}

TdmaAllocation solve_tdma_eea(const ChannelInstance& inst,
                              const SystemParams& params,
                              TdmaSolveInfo* info) {
  params.validate();
  const double s0 = 0.5 * params.total_energy;
  const double alpha0 = s0 / params.peak_power;
  return solve_tdma_dual(inst, params, &s0, &alpha0, info);
}

namespace {

TdmaAllocation tdma_grid_benchmark(const ChannelInstance& inst,
                                   const SystemParams& params,
                                   double grid_step, bool proportional) {
  params.validate();
  if (!(grid_step > 0.0 && grid_step <= 0.1))
    throw std::invalid_argument("grid_step must be in (0, 0.1]");
  const int K = params.num_pairs;
  const double P = params.total_energy;
  const double peak = params.peak_power;
  const double eta = params.conversion_efficiency;
  const double sigma2 = inst.noise_power_tdma;
  const double a0_max = std::min(1.0, P / peak);

  TdmaAllocation best;
  bool found = false;
  const int steps = static_cast<int>(a0_max / grid_step + 1e-9);
  for (int i = 1; i <= steps; ++i) {
    const double a0 = std::min(i * grid_step, a0_max);
    if (1.0 - a0 < 1e-12) break;
    const double s0 = a0 * peak;
    // Every source must cover its processing cost from the WPT phase alone.
    bool covered = true;
    for (int k = 0; k < K; ++k)
      if (eta * s0 * inst.g_wpt[k] < params.processing_cost[k]) covered = false;
    if (!covered) continue;

    std::vector<double> budget(K), a_sum_terms(K);
    double a_total = 0.0;
    for (int k = 0; k < K; ++k) {
      budget[k] =
          std::max(eta * s0 * inst.g_wpt[k] - params.processing_cost[k], 0.0);
      a_sum_terms[k] = budget[k] * inst.h1_tdma[k];
      a_total += a_sum_terms[k];
    }

    std::vector<double> alpha(K);
    if (proportional) {
      if (a_total <= 0.0) continue;
      for (int k = 0; k < K; ++k)
        alpha[k] = a_sum_terms[k] / a_total * (1.0 - a0);
    } else {
      for (int k = 0; k < K; ++k) alpha[k] = (1.0 - a0) / K;
    }

    const double p_wit = std::min(2.0 * (P - s0) / (1.0 - a0), peak);
    TdmaAllocation cand;
    cand.alpha.assign(K + 1, 0.0);
    cand.s.assign(K + 1, 0.0);
    cand.m.assign(K, 0.0);
    cand.rates.assign(K, 0.0);
    cand.alpha[0] = a0;
    cand.s[0] = s0;
    for (int k = 0; k < K; ++k) {
      if (alpha[k] <= 0.0 || budget[k] <= 0.0) {
        cand.alpha[k + 1] = alpha[k];
        continue;
      }
      const double q_k = 2.0 * budget[k] / alpha[k];
      cand.alpha[k + 1] = alpha[k];
      cand.s[k + 1] = 0.5 * alpha[k] * p_wit;
      cand.m[k] = budget[k];
      cand.rates[k] = 0.5 * alpha[k] *
                      std::min(std::log2(1.0 + q_k * inst.h1_tdma[k] / sigma2),
                               std::log2(1.0 + p_wit * inst.h2_tdma[k] / sigma2));
      cand.sum_rate += cand.rates[k];
    }
    if (!found || cand.sum_rate > best.sum_rate) {
      best = std::move(cand);
      found = true;
    }
  }
  if (!found) return tdma_minimal_allocation(inst, params);
  return best;
}

}  // namespace

TdmaAllocation solve_tdma_suboptimal(const ChannelInstance& inst,
                                     const SystemParams& params,
                                     double grid_step) {
  return tdma_grid_benchmark(inst, params, grid_step, /*proportional=*/true);
}

TdmaAllocation solve_tdma_era(const ChannelInstance& inst,
                              const SystemParams& params, double grid_step) {
  return tdma_grid_benchmark(inst, params, grid_step, /*proportional=*/false);
}

FeasibilityReport check_tdma_feasible(const TdmaAllocation& alloc,
                                      const ChannelInstance& inst,
                                      const SystemParams& params) {
  const int K = params.num_pairs;
  std::ostringstream oss;
  auto fail = [&](const std::string& what) {
    return FeasibilityReport{false, what};
  };
  if (alloc.alpha.size() != static_cast<std::size_t>(K + 1) ||
      alloc.s.size() != static_cast<std::size_t>(K + 1) ||
      alloc.m.size() != static_cast<std::size_t>(K) ||
      alloc.rates.size() != static_cast<std::size_t>(K))
    return fail("allocation vector sizes do not match K");

  double alpha_sum = 0.0, s_sum = 0.0;
  for (int k = 0; k <= K; ++k) {
    if (!std::isfinite(alloc.alpha[k]) || alloc.alpha[k] < -1e-12 ||
        alloc.alpha[k] > 1.0 + 1e-12)
      return fail("alpha out of [0,1]");
    if (!std::isfinite(alloc.s[k]) || alloc.s[k] < -1e-12)
      return fail("negative relay energy");
    alpha_sum += alloc.alpha[k];
    s_sum += alloc.s[k];
  }
  if (alpha_sum > 1.0 + 1e-9) {
    oss << "time budget exceeded: " << alpha_sum;
    return fail(oss.str());
  }
  if (s_sum > params.total_energy + 1e-9) {
    oss << "relay energy exceeded: " << s_sum;
    return fail(oss.str());
  }
  if (alloc.s[0] > alloc.alpha[0] * params.peak_power + 1e-12)
    return fail("WPT peak power exceeded");
  for (int k = 0; k < K; ++k)
    if (alloc.s[k + 1] > 0.5 * alloc.alpha[k + 1] * params.peak_power + 1e-12)
      return fail("WIT peak power exceeded");

  const double eta = params.conversion_efficiency;
  for (int k = 0; k < K; ++k) {
    if (!std::isfinite(alloc.m[k]) || alloc.m[k] < -1e-12)
      return fail("negative source energy");
    double harvested = alloc.s[0] * inst.g_wpt[k];
    for (int i = 0; i < k; ++i)
      harvested += alloc.s[i + 1] * inst.g_wpt[k] + alloc.m[i] * inst.g_ss[i][k];
    if (alloc.m[k] + params.processing_cost[k] > eta * harvested + 1e-12) {
      oss << "energy causality violated at pair " << k;
      return fail(oss.str());
    }
  }

  double sum = 0.0;
  for (int k = 0; k < K; ++k) {
    const double r =
        tdma_pair_rate(inst, alloc.alpha[k + 1], alloc.s[k + 1], alloc.m[k], k);
    if (std::abs(r - alloc.rates[k]) > 1e-9 * std::max(1.0, std::abs(r)))
      return fail("stored rate does not match the allocation");
    sum += alloc.rates[k];
  }
  if (std::abs(sum - alloc.sum_rate) > 1e-9 * std::max(1.0, sum))
    return fail("sum_rate does not match rates");
  return {};
}

}  // namespace rwpcn
