#include "rwpcn/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rwpcn {

namespace {

// Series around the branch point x = -1/e: W = -1 + p - p^2/3 + 11 p^3/72 ...
double branch_point_guess(double x) {
  const double p = std::sqrt(2.0 * (std::exp(1.0) * x + 1.0));
  return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
}

}  // namespace

double lambert_w0(double x) {
  constexpr double kBranch = -0.36787944117144233;  // -1/e
  if (std::isnan(x) || x < kBranch - 1e-14)
    throw std::domain_error("lambert_w0: x < -1/e");
  if (x <= kBranch) return -1.0;
  if (x == 0.0) return 0.0;

  double w;
  if (x < -0.25) {
    w = branch_point_guess(x);
  } else if (x < 2.0) {
    // A couple of fixed-point refinements of w = x e^{-w} from w = x/(1+x).
    w = x / (1.0 + x);
    w = x * std::exp(-w);
  } else {
    const double lx = std::log(x);
    w = lx - std::log(lx);
  }

  // Halley's method on f(w) = w e^w - x.
  for (int it = 0; it < 64; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double fp = ew * (w + 1.0);
    const double denom = fp - (w + 2.0) * f / (2.0 * w + 2.0);
    const double step = f / denom;
    w -= step;
    if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(w))) break;
  }
  return w;
}

namespace {

constexpr double kFeasTol = 1e-9;

bool feasible_point(const std::array<double, 2>& x,
                    std::span<const HalfPlane> cons,
                    const std::array<double, 2>& lo,
                    const std::array<double, 2>& hi, int dim, double tol) {
  for (int d = 0; d < dim; ++d)
    if (x[d] < lo[d] - tol || x[d] > hi[d] + tol) return false;
  for (const auto& h : cons) {
    const double lhs = h.a0 * x[0] + (dim > 1 ? h.a1 * x[1] : 0.0);
    const double scale = std::max({1.0, std::abs(h.b), std::abs(lhs)});
    if (lhs > h.b + tol * scale) return false;
  }
  return true;
}

HalfPlane most_violated(const std::array<double, 2>& x,
                        std::span<const HalfPlane> cons, int dim) {
  HalfPlane worst{};
  double worst_violation = -std::numeric_limits<double>::infinity();
  for (const auto& h : cons) {
    const double v = h.a0 * x[0] + (dim > 1 ? h.a1 * x[1] : 0.0) - h.b;
    if (v > worst_violation) {
      worst_violation = v;
      worst = h;
    }
  }
  return worst;
}

}  // namespace

std::array<double, 2> solve_tiny_lp(std::array<double, 2> c,
                                    std::span<const HalfPlane> constraints,
                                    std::array<double, 2> lo,
                                    std::array<double, 2> hi, int dim) {
  if (dim != 1 && dim != 2)
    throw std::invalid_argument("solve_tiny_lp: dim must be 1 or 2");
  for (int d = 0; d < dim; ++d)
    if (lo[d] > hi[d])
      throw std::invalid_argument("solve_tiny_lp: empty box");

  std::vector<std::array<double, 2>> candidates;

  if (dim == 1) {
    // Interval from the box intersected with a0*x <= b constraints.
    double l = lo[0], u = hi[0];
    for (const auto& h : constraints) {
      if (h.a0 > 0.0)
        u = std::min(u, h.b / h.a0);
      else if (h.a0 < 0.0)
        l = std::max(l, h.b / h.a0);
      else if (h.b < -kFeasTol)
        throw LpInfeasible("solve_tiny_lp: constant constraint violated", h);
    }
    if (l > u + kFeasTol * std::max(1.0, std::abs(l)))
      throw LpInfeasible("solve_tiny_lp: empty interval",
                         most_violated({l, 0.0}, constraints, 1));
    u = std::max(l, u);
    candidates.push_back({l, 0.0});
    candidates.push_back({u, 0.0});
  } else {
    // All constraints including the four box edges; intersect every pair.
    std::vector<HalfPlane> all(constraints.begin(), constraints.end());
    all.push_back({1.0, 0.0, hi[0]});
    all.push_back({-1.0, 0.0, -lo[0]});
    all.push_back({0.0, 1.0, hi[1]});
    all.push_back({0.0, -1.0, -lo[1]});
    for (std::size_t i = 0; i < all.size(); ++i) {
      for (std::size_t j = i + 1; j < all.size(); ++j) {
        const auto& p = all[i];
        const auto& q = all[j];
        const double det = p.a0 * q.a1 - p.a1 * q.a0;
        const double norm = std::max({std::abs(p.a0), std::abs(p.a1), 1.0}) *
                            std::max({std::abs(q.a0), std::abs(q.a1), 1.0});
        if (std::abs(det) <= 1e-14 * norm) continue;
        candidates.push_back({(p.b * q.a1 - p.a1 * q.b) / det,
                              (p.a0 * q.b - p.b * q.a0) / det});
      }
    }
  }

  bool found = false;
  std::array<double, 2> best{0.0, 0.0};
  double best_val = -std::numeric_limits<double>::infinity();
  for (const auto& x : candidates) {
    if (!std::isfinite(x[0]) || (dim > 1 && !std::isfinite(x[1]))) continue;
    if (!feasible_point(x, constraints, lo, hi, dim, kFeasTol)) continue;
    const double val = c[0] * x[0] + (dim > 1 ? c[1] * x[1] : 0.0);
    const double tie = 1e-12 * std::max(1.0, std::abs(best_val));
    bool better = !found || val > best_val + tie;
    if (found && !better && val >= best_val - tie) {
      // Tie: prefer lexicographically smallest point.
      better = x[0] < best[0] - 1e-12 ||
               (std::abs(x[0] - best[0]) <= 1e-12 && x[1] < best[1]);
    }
    if (better) {
      found = true;
      best = x;
      best_val = std::max(best_val, val);
    }
  }
  if (!found) {
    // Report the constraint most violated at the box centre.
    const std::array<double, 2> mid{0.5 * (lo[0] + hi[0]),
                                    0.5 * (lo[1] + hi[1])};
    throw LpInfeasible("solve_tiny_lp: infeasible",
                       most_violated(mid, constraints, dim));
  }
  best[0] = std::clamp(best[0], lo[0], hi[0]);
  if (dim > 1) best[1] = std::clamp(best[1], lo[1], hi[1]);
  return best;
}

}  // namespace rwpcn
