#include <doctest.h>

#include <cmath>
#include <random>

#include "rwpcn/numerics.hpp"

using namespace rwpcn;

TEST_CASE("bisect on a linear function") {
  const double r = bisect([](double x) { return 1.0 - 2.0 * x; }, 0.0, 1.0, 1e-10);
  CHECK(r == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("bisect clamps to the boundary") {
  CHECK(bisect([](double) { return -1.0; }, 0.0, 1.0, 1e-10) == 0.0);
  CHECK(bisect([](double) { return 1.0; }, 0.0, 1.0, 1e-10) == 1.0);
  CHECK_THROWS_AS(bisect([](double x) { return x; }, 1.0, 0.0, 1e-10),
                  std::invalid_argument);
}

TEST_CASE("bisect is consistent under tightened tolerance") {
  auto f = [](double x) { return std::cos(x) - x; };
  const double loose = bisect(f, 0.0, 1.0, 1e-6);
  const double tight = bisect(f, 0.0, 1.0, 1e-12);
  CHECK(std::abs(loose - tight) <= 2e-6);
}

TEST_CASE("lambert_w0 fixed points") {
  CHECK(lambert_w0(0.0) == 0.0);
  CHECK(lambert_w0(std::exp(1.0)) == doctest::Approx(1.0).epsilon(1e-12));
  // w e^w = -0.2 solved independently: w = -0.25917110181907377
  const double w = lambert_w0(-0.2);
  CHECK(w == doctest::Approx(-0.25917110181907377).epsilon(1e-12));
  CHECK(std::abs(w * std::exp(w) + 0.2) <= 1e-12);
  CHECK_THROWS_AS(lambert_w0(-0.4), std::domain_error);
}

TEST_CASE("lambert_w0 round trip over the domain") {
  std::mt19937_64 rng(11);
  auto uniform = [&](double lo, double hi) {
    return lo + (hi - lo) * ((rng() >> 11) * 0x1.0p-53);
  };
  for (int i = 0; i < 1000; ++i) {
    const double x = uniform(-std::exp(-1.0) + 1e-12, 10.0);
    const double w = lambert_w0(x);
    CHECK(std::abs(w * std::exp(w) - x) <= 1e-10 * std::max(1.0, std::abs(x)));
  }
  // Near the branch point.
  for (double d : {1e-10, 1e-8, 1e-6, 1e-4}) {
    const double x = -std::exp(-1.0) + d;
    const double w = lambert_w0(x);
    CHECK(std::abs(w * std::exp(w) - x) <= 1e-10);
  }
}

TEST_CASE("tiny lp one-variable examples") {
  std::vector<HalfPlane> cons{{1, 0, 3}, {1, 0, 5}};
  const auto x = solve_tiny_lp({1, 0}, cons, {0, 0}, {100, 0}, 1);
  CHECK(x[0] == doctest::Approx(3.0));
}

TEST_CASE("tiny lp two-variable examples") {
  std::vector<HalfPlane> cons{{1, 1, 1}};
  const auto x = solve_tiny_lp({1, 1}, cons, {0, 0}, {1, 1});
  CHECK(x[0] + x[1] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("tiny lp reports infeasibility with the violated constraint") {
  std::vector<HalfPlane> cons{{1, 0, -2}};  // x0 <= -2 against box [0,1]
  CHECK_THROWS_AS(solve_tiny_lp({1, 0}, cons, {0, 0}, {1, 1}),
                  LpInfeasible);
  try {
    solve_tiny_lp({1, 0}, cons, {0, 0}, {1, 1});
  } catch (const LpInfeasible& e) {
    CHECK(e.violated.b == doctest::Approx(-2.0));
  }
}

TEST_CASE("tiny lp matches a dense grid oracle") {
  std::mt19937_64 rng(23);
  auto uniform = [&](double lo, double hi) {
    return lo + (hi - lo) * ((rng() >> 11) * 0x1.0p-53);
  };
  int solved = 0;
  while (solved < 100) {
    std::array<double, 2> c{uniform(-1, 1), uniform(-1, 1)};
    std::vector<HalfPlane> cons;
    const int m = 1 + static_cast<int>(uniform(0, 4));
    for (int i = 0; i < m; ++i)
      cons.push_back({uniform(-1, 1), uniform(-1, 1), uniform(-0.2, 1)});

    std::array<double, 2> best{0, 0};
    double best_val = -1e300;
    bool any = false;
    const int g = 300;
    for (int i = 0; i <= g; ++i)
      for (int j = 0; j <= g; ++j) {
        const std::array<double, 2> x{i / double(g), j / double(g)};
        bool ok = true;
        for (const auto& h : cons)
          if (h.a0 * x[0] + h.a1 * x[1] > h.b + 1e-12) ok = false;
        if (!ok) continue;
        any = true;
        const double v = c[0] * x[0] + c[1] * x[1];
        if (v > best_val) {
          best_val = v;
          best = x;
        }
      }
    if (!any) continue;  // grid found nothing; skip degenerate draws
    ++solved;
    const auto x = solve_tiny_lp(c, cons, {0, 0}, {1, 1});
    const double v = c[0] * x[0] + c[1] * x[1];
    // Exact optimum dominates any feasible grid point, and the grid gets
    // within one cell of the optimum.
    CHECK(v >= best_val - 1e-9);
    CHECK(v - best_val <=
          (std::abs(c[0]) + std::abs(c[1])) * (1.0 / g) + 1e-9);
  }
}
