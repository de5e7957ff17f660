#include <doctest.h>

#include <cmath>
#include <tuple>
#include <random>

#include "oracles.hpp"
#include "rwpcn/model.hpp"
#include "rwpcn/numerics.hpp"
#include "rwpcn/tdma.hpp"

using namespace rwpcn;

namespace {

ChannelInstance seeded_instance(const SystemParams& params, std::uint64_t seed,
                                double relay_x = 0.0) {
  ScenarioLayout layout;
  layout.relay_position.x = relay_x;
  const Geometry g = sample_geometry(layout, params.num_pairs, seed * 2 + 1);
  return generate_instance(params, g, seed);
}

// duals = [lambda..., nu..., mu, xi]
std::vector<double> make_duals(int K, double lambda, double nu, double mu,
                               double xi) {
  std::vector<double> d(2 * K + 2);
  for (int k = 0; k < K; ++k) {
    d[k] = lambda;
    d[K + k] = nu;
  }
  d[2 * K] = mu;
  d[2 * K + 1] = xi;
  return d;
}

double urand(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * ((rng() >> 11) * 0x1.0p-53);
}

}  // namespace

TEST_CASE("energy closed forms: lambda boundaries") {
  const SystemParams p = default_params(2, 2);
  const ChannelInstance inst = seeded_instance(p, 3);
  auto d = make_duals(2, 1.0, 0.0, 0.1, 1.0);  // lambda=1, positive s-price
  auto [s, m] = inner_energy_allocation(inst, p, 0.5, d, 1);
  CHECK(s == 0.0);  // numerator 1-lambda vanishes

  d = make_duals(2, 0.0, 1.0, 0.1, 1.0);  // lambda=0, positive m-price
  std::tie(s, m) = inner_energy_allocation(inst, p, 0.5, d, 1);
  CHECK(m == 0.0);
}

TEST_CASE("energy closed forms: nonpositive price clamps to the peak") {
  const SystemParams p = default_params(2, 2);
  const ChannelInstance inst = seeded_instance(p, 4);
  // xi = 0 makes the relay-energy price nonpositive.
  const auto d = make_duals(2, 0.5, 0.1, 0.1, 0.0);
  const auto [s, m] = inner_energy_allocation(inst, p, 0.4, d, 1);
  CHECK(s == doctest::Approx(0.5 * 0.4 * p.peak_power));
  (void)m;
}

TEST_CASE("last pair's energies maximize its Lagrangian (grid oracle)") {
  const SystemParams p = default_params(2, 2);
  const ChannelInstance inst = seeded_instance(p, 5);
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> d = make_duals(2, urand(rng, 0.2, 0.8),
                                       urand(rng, 1.0, 30.0),
                                       urand(rng, 0.1, 5.0),
                                       urand(rng, 0.2, 2.0));
    const double alpha = urand(rng, 0.2, 0.9);
    const int k = 1;  // last pair: tail sums vanish
    const auto [s, m] = inner_energy_allocation(inst, p, alpha, d, k);
    const double val = tdma_pair_lagrangian(inst, p, d, k, s, m, alpha);
    const double grid = oracle::tdma_energy_grid_max(inst, p, d, k, alpha);
    CHECK(val >= grid - 1e-6 * std::max(1.0, std::abs(grid)));
  }
}

TEST_CASE("time allocation boundary cases") {
  const SystemParams p = default_params(2, 2);
  const ChannelInstance inst = seeded_instance(p, 6);
  // Zero energies: derivative is -mu everywhere, clamp to the floor.
  auto d = make_duals(2, 0.5, 1.0, 0.3, 1.0);
  CHECK(inner_time_allocation(inst, p, 0.0, 0.0, d, 0) ==
        doctest::Approx(1e-6));
  // mu = 0 with positive energies: no time price, alpha = 1.
  d = make_duals(2, 0.5, 1.0, 0.0, 1.0);
  CHECK(inner_time_allocation(inst, p, 0.01, 0.001, d, 0) == 1.0);
}

TEST_CASE("time allocation matches a dense grid argmax") {
  const SystemParams p = default_params(2, 2);
  const ChannelInstance inst = seeded_instance(p, 7);
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 5; ++trial) {
    const auto d = make_duals(2, urand(rng, 0.3, 0.7), urand(rng, 5, 40),
                              urand(rng, 0.5, 8.0), urand(rng, 0.3, 2.0));
    const double s = urand(rng, 1e-4, 0.2);
    const double m = urand(rng, 1e-5, 1e-2);
    const double a = inner_time_allocation(inst, p, s, m, d, 0);
    const double grid = oracle::tdma_alpha_grid_argmax(inst, p, d, 0, s, m);
    CHECK(std::abs(a - grid) <= 1e-3);
  }
}

TEST_CASE("bcd starts from alpha = 1/K") {
  const SystemParams p = default_params(4, 4);
  const ChannelInstance inst = seeded_instance(p, 8);
  const auto d = make_duals(4, 0.5, 10.0, 1.0, 0.5);
  // One round with an always-false improvement test: the returned alpha is
  // the time step applied to the energies computed at alpha = 1/K.
  const auto pt = inner_bcd(inst, p, d, 0, -1e300, 1);
  const auto [s0, m0] = inner_energy_allocation(inst, p, 0.25, d, 0);
  const double expect = inner_time_allocation(inst, p, s0, m0, d, 0);
  CHECK(pt.alpha == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("bcd fixed point satisfies both stationarity conditions") {
  const SystemParams p = default_params(1, 1);
  const ChannelInstance inst = seeded_instance(p, 9);
  const auto d = make_duals(1, 0.5, 20.0, 2.0, 0.8);
  const auto pt = inner_bcd(inst, p, d, 0, 1e-13, 2000);
  // Energy block is stationary by construction.
  const auto [s, m] = inner_energy_allocation(inst, p, pt.alpha, d, 0);
  CHECK(pt.s == doctest::Approx(s).epsilon(1e-9));
  CHECK(pt.m == doctest::Approx(m).epsilon(1e-9));
  // Time block: interior root or boundary with the right derivative sign.
  const double f = tdma_alpha_derivative(inst, p, d, 0, pt.s, pt.m, pt.alpha);
  if (pt.alpha >= 1.0 - 1e-9)
    CHECK(f >= -1e-6);
  else if (pt.alpha <= 1e-6 + 1e-9)
    CHECK(f <= 1e-6);
  else
    CHECK(std::abs(f) <= 1e-6);
  // The Lagrangian never decreased across rounds (spot check vs round 1).
  const auto first = inner_bcd(inst, p, d, 0, -1e300, 1);
  CHECK(pt.lagrangian >= first.lagrangian - 1e-12);
}

TEST_CASE("bcd with vanishing channels switches the pair off") {
  SystemParams p = default_params(1, 1);
  ChannelInstance inst = seeded_instance(p, 10);
  inst.h1_tdma[0] = 1e-30;
  inst.h2_tdma[0] = 1e-30;
  const auto d = make_duals(1, 0.5, 1.0, 0.5, 0.5);
  const auto pt = inner_bcd(inst, p, d, 0);
  CHECK(pt.s == 0.0);
  CHECK(pt.m == 0.0);
}

TEST_CASE("wpt slot decision boundaries and tie rule") {
  const SystemParams p = default_params(1, 1);
  ChannelInstance inst = seeded_instance(p, 11);
  // nu = 0: no energy demand.
  auto d = make_duals(1, 0.5, 0.0, 0.0, 0.0);
  auto [s0, a0] = wpt_slot_decision(d, p, inst);
  CHECK(s0 == 0.0);
  CHECK(a0 == 0.0);
  // Free energy: xi = mu = 0, positive nu.
  d = make_duals(1, 0.5, 1.0, 0.0, 0.0);
  std::tie(s0, a0) = wpt_slot_decision(d, p, inst);
  CHECK(a0 == 1.0);
  CHECK(s0 == doctest::Approx(p.peak_power));
  // Exact tie switches off.
  inst.g_wpt[0] = 1.0;
  const double eta = p.conversion_efficiency;
  d = make_duals(1, 0.5, 1.0, 0.0, eta * 1.0);
  std::tie(s0, a0) = wpt_slot_decision(d, p, inst);
  CHECK(s0 == 0.0);
}

TEST_CASE("subgradient slack signs and rate balance") {
  const SystemParams p = default_params(2, 2);
  const ChannelInstance inst = seeded_instance(p, 12);
  // A strictly feasible inner point: tiny energies, tiny times.
  TdmaInnerSolution inner;
  inner.alpha = {0.1, 0.1};
  inner.s = {1e-4, 1e-4};
  inner.m = {0.0, 0.0};
  inner.s0 = 0.1;
  inner.alpha0 = 0.1;
  const auto g = tdma_subgradient(inner, inst, p);
  CHECK(g[2 * 2] > 0.0);      // time slack
  CHECK(g[2 * 2 + 1] > 0.0);  // relay energy slack
  CHECK(g[2] > 0.0);          // nu_0 slack: harvest covers nothing spent
  CHECK(g[3] > 0.0);

  // Equal hop rates null the lambda component.
  TdmaInnerSolution bal;
  bal.alpha = {0.5, 0.0};
  bal.s = {0.01, 0.0};
  bal.m = {0.01 * inst.h2_tdma[0] / inst.h1_tdma[0], 0.0};
  bal.s0 = 0.0;
  bal.alpha0 = 0.0;
  const auto gb = tdma_subgradient(bal, inst, p);
  CHECK(gb[0] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("finite differences confirm the subgradient convention") {
  const SystemParams p = default_params(2, 2);
  const ChannelInstance inst = seeded_instance(p, 13);
  std::mt19937_64 rng(31);
  const double eps = 1e-4;
  int checked = 0;
  for (int trial = 0; trial < 12 && checked < 6; ++trial) {
    std::vector<double> theta = make_duals(2, urand(rng, 0.25, 0.75),
                                           urand(rng, 2.0, 30.0),
                                           urand(rng, 0.5, 6.0),
                                           urand(rng, 0.3, 2.0));
    const auto inner = tdma_inner_solve(inst, p, theta);
    const double g0 = tdma_dual_value(inner, inst, p, theta);
    const auto sub = tdma_subgradient(inner, inst, p);
    for (std::size_t j = 0; j < theta.size(); ++j) {
      auto tp = theta;
      tp[j] += eps;
      if (j < 2 && tp[j] > 1.0) continue;
      const auto inner_p = tdma_inner_solve(inst, p, tp);
      // Differentiability screen: the active structure must not change.
      bool same = inner_p.alpha0 == inner.alpha0 &&
                  (inner_p.s0 > 0) == (inner.s0 > 0);
      for (int k = 0; k < 2 && same; ++k)
        same = std::abs(inner_p.alpha[k] - inner.alpha[k]) < 0.05 &&
               (inner_p.m[k] > 0) == (inner.m[k] > 0) &&
               (inner_p.s[k] > 0) == (inner.s[k] > 0);
      if (!same) continue;
      const double g1 = tdma_dual_value(inner_p, inst, p, tp);
      const double fd = (g1 - g0) / eps;
      if (std::abs(fd) < 1e-3) continue;
      CHECK(std::abs(fd - sub[j]) <= 0.05 * std::abs(fd) + 1e-6);
      ++checked;
    }
  }
  CHECK(checked >= 3);
}

TEST_CASE("optimal solver matches the K=1 brute-force oracle") {
  SystemParams p = default_params(1, 1);
  for (std::uint64_t seed : {21u, 22u, 23u}) {
    const ChannelInstance inst = seeded_instance(p, seed);
    TdmaSolveInfo info;
    const auto alloc = solve_tdma_optimal(inst, p, &info);
    REQUIRE(check_tdma_feasible(alloc, inst, p).ok);
    const double oracle_rate = oracle::tdma_k1_best_rate(inst, p);
    CHECK(alloc.sum_rate ==
          doctest::Approx(oracle_rate).epsilon(0.01));
    // Weak duality.
    CHECK(info.dual_objective >= alloc.sum_rate - 1e-9);
  }
}

TEST_CASE("huge peak power drives the WPT slot toward zero") {
  SystemParams p = default_params(2, 2);
  p.peak_power = 1e6 * p.total_energy;
  const ChannelInstance inst = seeded_instance(p, 25);
  const auto alloc = solve_tdma_optimal(inst, p);
  CHECK(alloc.alpha[0] < 1e-3);
}

TEST_CASE("recovered WPT power sits at the peak") {
  const SystemParams p = default_params(3, 3);
  for (std::uint64_t seed : {31u, 32u}) {
    const ChannelInstance inst = seeded_instance(p, seed);
    const auto alloc = solve_tdma_optimal(inst, p);
    if (alloc.alpha[0] > 1e-5) {
      const double p0 = alloc.s[0] / alloc.alpha[0];
      CHECK(p0 == doctest::Approx(p.peak_power).epsilon(1e-3));
    }
  }
}

TEST_CASE("eea pins the WPT energy to P/2 and cannot beat optimal") {
  const SystemParams p = default_params(2, 2);
  const ChannelInstance inst = seeded_instance(p, 41);
  TdmaSolveInfo info;
  const auto eea = solve_tdma_eea(inst, p, &info);
  REQUIRE(check_tdma_feasible(eea, inst, p).ok);
  CHECK(eea.s[0] == doctest::Approx(0.5 * p.total_energy).epsilon(1e-12));
  const auto opt = solve_tdma_optimal(inst, p);
  CHECK(eea.sum_rate <= opt.sum_rate + 1e-6);
}

TEST_CASE("suboptimal time split is proportional and exhausts the block") {
  const SystemParams p = default_params(3, 3);
  const ChannelInstance inst = seeded_instance(p, 51);
  const auto alloc = solve_tdma_suboptimal(inst, p);
  REQUIRE(check_tdma_feasible(alloc, inst, p).ok);
  double wit = 0.0;
  for (int k = 1; k <= 3; ++k) wit += alloc.alpha[k];
  CHECK(wit == doctest::Approx(1.0 - alloc.alpha[0]).epsilon(1e-12));
}

TEST_CASE("suboptimal on a symmetric instance splits time equally") {
  SystemParams p = default_params(2, 2);
  ChannelInstance inst = seeded_instance(p, 52);
  inst.g_wpt = {0.005, 0.005};
  inst.h1_tdma = {0.004, 0.004};
  inst.h2_tdma = {0.006, 0.006};
  const auto alloc = solve_tdma_suboptimal(inst, p);
  CHECK(alloc.alpha[1] == doctest::Approx(alloc.alpha[2]).epsilon(1e-12));
}

TEST_CASE("proportional split agrees with the Lambert-W KKT route") {
  const SystemParams p = default_params(4, 4);
  const ChannelInstance inst = seeded_instance(p, 53);
  const double sig = inst.noise_power_tdma;
  const double a0 = 0.2;
  const double eta = p.conversion_efficiency;
  std::vector<double> A(4);
  double a_sum = 0.0;
  for (int k = 0; k < 4; ++k) {
    A[k] = std::max(eta * a0 * p.peak_power * inst.g_wpt[k] -
                        p.processing_cost[k],
                    0.0) *
           inst.h1_tdma[k];
    a_sum += A[k];
  }
  REQUIRE(a_sum > 0.0);
  // Lambert route: pick the time price so the slots fill 1 - a0.
  auto alpha_w = [&](double lam_star, int k) {
    const double delta = -1.0 - 2.0 * std::log(2.0) * lam_star;
    const double w = lambert_w0(-std::exp(delta));
    return -2.0 * A[k] * w / (sig * (1.0 + w));
  };
  auto slack = [&](double lam_star) {
    double total = 0.0;
    for (int k = 0; k < 4; ++k) total += alpha_w(lam_star, k);
    return total - (1.0 - a0);
  };
  const double lam_star = bisect(slack, 1e-9, 100.0, 1e-13);
  for (int k = 0; k < 4; ++k) {
    const double proportional = A[k] / a_sum * (1.0 - a0);
    CHECK(alpha_w(lam_star, k) ==
          doctest::Approx(proportional).epsilon(1e-6));
  }
}

TEST_CASE("era uses equal times and never beats the optimum") {
  const SystemParams p = default_params(3, 3);
  const ChannelInstance inst = seeded_instance(p, 54);
  const auto era = solve_tdma_era(inst, p);
  REQUIRE(check_tdma_feasible(era, inst, p).ok);
  CHECK(era.alpha[1] == doctest::Approx(era.alpha[2]));
  CHECK(era.alpha[2] == doctest::Approx(era.alpha[3]));
  const auto opt = solve_tdma_optimal(inst, p);
  CHECK(era.sum_rate <= opt.sum_rate + 1e-6);
}

TEST_CASE("terminal LP matches a dense s0 grid search") {
  const SystemParams p = default_params(2, 2);
  const ChannelInstance inst = seeded_instance(p, 55);
  // A plausible WIT allocation; the LP finds the least WPT energy covering it.
  const std::vector<double> alpha{0.3, 0.3}, s{0.1, 0.1};
  const std::vector<double> m{1e-4, 2e-4};
  const double s0 = tdma_terminal_s0(inst, p, alpha, s, m);
  // Grid oracle at 1e-5 resolution over the feasible interval.
  const double hi = p.total_energy;
  double best = -1.0;
  const double eta = p.conversion_efficiency;
  for (double x = 0.0; x <= hi; x += 1e-5) {
    bool ok = x <= p.total_energy - 0.2 + 1e-12 &&
              x <= (1.0 - 0.6) * p.peak_power + 1e-12;
    double side0 = 0.0;
    if (m[0] + p.processing_cost[0] > eta * (x * inst.g_wpt[0] + side0) + 1e-15)
      ok = false;
    const double side1 = s[0] * inst.g_wpt[1] + m[0] * inst.g_ss[0][1];
    if (m[1] + p.processing_cost[1] > eta * (x * inst.g_wpt[1] + side1) + 1e-15)
      ok = false;
    if (ok) {
      best = x;
      break;  // smallest feasible s0
    }
  }
  REQUIRE(best >= 0.0);
  CHECK(s0 == doctest::Approx(best).epsilon(1e-3));
}

TEST_CASE("dual objective decreases to a weak-duality certificate") {
  const SystemParams p = default_params(2, 2);
  for (std::uint64_t seed : {61u, 62u, 63u}) {
    const ChannelInstance inst = seeded_instance(p, seed);
    TdmaSolveInfo info;
    const auto alloc = solve_tdma_optimal(inst, p, &info);
    REQUIRE(check_tdma_feasible(alloc, inst, p).ok);
    CHECK(info.dual_objective >= alloc.sum_rate - 1e-9);
    CHECK(alloc.sum_rate > 0.0);
  }
}
