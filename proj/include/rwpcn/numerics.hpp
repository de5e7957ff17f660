#pragma once
// Scalar numeric kernels: bisection for monotone roots, principal-branch
// Lambert W, and an exact vertex-enumeration LP in one or two variables.

#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rwpcn {

// Root of a nonincreasing f on [lo, hi]. Returns lo if f(lo) <= 0 and hi if
// f(hi) >= 0; otherwise bisection until |f| <= tol or width <= tol.
template <class F>
double bisect(F&& f, double lo, double hi, double tol) {
  if (lo > hi) throw std::invalid_argument("bisect: lo > hi");
  if (f(lo) <= 0.0) return lo;
  if (f(hi) >= 0.0) return hi;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (std::abs(fm) <= tol) return mid;
    if (fm > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Principal branch W0: w e^w = x for x >= -1/e, |w e^w - x| small enough for
// relative error <= 1e-12. Halley iteration from a piecewise initial guess.
double lambert_w0(double x);

// a0*x0 + a1*x1 <= b
struct HalfPlane {
  double a0 = 0.0;
  double a1 = 0.0;
  double b = 0.0;
};

struct LpInfeasible : std::runtime_error {
  explicit LpInfeasible(const std::string& what, HalfPlane violated_)
      : std::runtime_error(what), violated(violated_) {}
  HalfPlane violated;
};

// Maximize c . x over the intersection of half-planes and the box
// [lo, hi]^dim; dim is 1 or 2 (dim 1 ignores the second coordinate).
// Exact vertex enumeration; ties broken toward lexicographically smallest x.
std::array<double, 2> solve_tiny_lp(std::array<double, 2> c,
                                    std::span<const HalfPlane> constraints,
                                    std::array<double, 2> lo,
                                    std::array<double, 2> hi, int dim = 2);

}  // namespace rwpcn
