#pragma once
// Ellipsoid method state for dual descent. The state owns the multiplier box:
// after every step the center is projected onto it to produce the multiplier
// vector used by the inner maximizations.

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rwpcn {

struct ConvergenceFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DualState {
  std::vector<double> multipliers;      // projected center, length q
  std::vector<double> ellipsoid_center; // raw center, length q
  std::vector<double> ellipsoid_shape;  // q x q SPD, row-major
  std::vector<double> box_lo, box_hi;   // projection box (hi may be +inf)
  int iteration = 0;

  std::size_t dim() const { return multipliers.size(); }
};

// Initial state: ellipsoid centered at `center` with per-axis radii `radii`
// (shape = diag(radii^2)), multipliers projected onto [box_lo, box_hi].
DualState make_dual_state(std::vector<double> center,
                          std::vector<double> radii, std::vector<double> box_lo,
                          std::vector<double> box_hi);

// One central-cut update along `subgradient`. A zero subgradient leaves the
// state unchanged. Throws ConvergenceFailure if the shape matrix cannot be
// kept positive definite.
DualState ellipsoid_step(const DualState& state,
                         std::span<const double> subgradient);

// log(sqrt(det(shape))): proportional to the log-volume of the ellipsoid.
double ellipsoid_log_volume(const DualState& state);

// True if the raw center lies in the box within tol; otherwise *coord /
// *low_side describe the most violated coordinate (low_side: below box_lo).
bool center_in_box(const DualState& state, double tol, std::size_t* coord,
                   bool* low_side);

}  // namespace rwpcn
