#include "rwpcn/ellipsoid.hpp"

#include <algorithm>
#include <cmath>

#include "rwpcn/kernels.hpp"

namespace rwpcn {

namespace {

// In-place Cholesky test; returns false if a pivot fails. `a` is row-major.
bool cholesky_ok(std::vector<double> a, std::size_t n,
                 double* log_det = nullptr) {
  double ld = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double sum = a[i * n + j];
      for (std::size_t k = 0; k < i; ++k)
        sum -= a[i * n + k] * a[j * n + k];
      if (i == j) {
        if (!(sum > 0.0) || !std::isfinite(sum)) return false;
        const double piv = std::sqrt(sum);
        a[i * n + i] = piv;
        ld += std::log(piv);
      } else {
        a[j * n + i] = sum / a[i * n + i];
      }
    }
  }
  if (log_det) *log_det = 2.0 * ld;
  return true;
}

void project(const std::vector<double>& center, const std::vector<double>& lo,
             const std::vector<double>& hi, std::vector<double>& out) {
  const std::size_t n = center.size();
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = std::clamp(center[i], lo[i], hi[i]);
}

// Symmetrize and, if needed, add escalating diagonal jitter until SPD.
void repair_spd(std::vector<double>& a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = 0.5 * (a[i * n + j] + a[j * n + i]);
      a[i * n + j] = v;
      a[j * n + i] = v;
    }
  if (cholesky_ok(a, n)) return;
  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) trace += std::abs(a[i * n + i]);
  double jitter = 1e-12 * std::max(trace / static_cast<double>(n), 1e-30);
  for (int attempt = 0; attempt < 10; ++attempt) {
    for (std::size_t i = 0; i < n; ++i) a[i * n + i] += jitter;
    if (cholesky_ok(a, n)) return;
    jitter *= 10.0;
  }
  throw ConvergenceFailure("ellipsoid shape matrix lost positive definiteness");
}

}  // namespace

DualState make_dual_state(std::vector<double> center,
                          std::vector<double> radii, std::vector<double> box_lo,
                          std::vector<double> box_hi) {
  const std::size_t q = center.size();
  if (radii.size() != q || box_lo.size() != q || box_hi.size() != q)
    throw std::invalid_argument("make_dual_state: size mismatch");
  DualState st;
  st.ellipsoid_center = std::move(center);
  st.box_lo = std::move(box_lo);
  st.box_hi = std::move(box_hi);
  st.ellipsoid_shape.assign(q * q, 0.0);
  for (std::size_t i = 0; i < q; ++i)
    st.ellipsoid_shape[i * q + i] = radii[i] * radii[i];
  project(st.ellipsoid_center, st.box_lo, st.box_hi, st.multipliers);
  return st;
}

DualState ellipsoid_step(const DualState& state,
                         std::span<const double> subgradient) {
  const std::size_t q = state.dim();
  if (subgradient.size() != q)
    throw std::invalid_argument("ellipsoid_step: subgradient size mismatch");

  DualState next = state;
  next.iteration = state.iteration + 1;

  double gnorm2 = 0.0;
  for (double gi : subgradient) gnorm2 += gi * gi;
  if (gnorm2 <= 0.0 || !std::isfinite(gnorm2)) {
    project(next.ellipsoid_center, next.box_lo, next.box_hi, next.multipliers);
    return next;  // stationary: zero subgradient cuts nothing
  }

  if (q == 1) {
    // Degenerates to interval halving: radius r -> r/2, center shifts r/2
    // away from the subgradient direction.
    const double r = std::sqrt(state.ellipsoid_shape[0]);
    const double sign = subgradient[0] > 0.0 ? 1.0 : -1.0;
    next.ellipsoid_center[0] = state.ellipsoid_center[0] - sign * 0.5 * r;
    next.ellipsoid_shape[0] = 0.25 * state.ellipsoid_shape[0];
    project(next.ellipsoid_center, next.box_lo, next.box_hi, next.multipliers);
    return next;
  }

  const double qd = static_cast<double>(q);
  std::vector<double> ag(q);
  kern::matvec(state.ellipsoid_shape.data(), subgradient.data(), ag.data(), q);
  const double gag = kern::dot(subgradient.data(), ag.data(), q);
  if (!(gag > 0.0) || !std::isfinite(gag)) {
    next.ellipsoid_shape = state.ellipsoid_shape;
    repair_spd(next.ellipsoid_shape, q);
    kern::matvec(next.ellipsoid_shape.data(), subgradient.data(), ag.data(), q);
    const double gag2 = kern::dot(subgradient.data(), ag.data(), q);
    if (!(gag2 > 0.0) || !std::isfinite(gag2))
      throw ConvergenceFailure("ellipsoid_step: g'Ag not positive");
    const double inv = 1.0 / std::sqrt(gag2);
    for (double& v : ag) v *= inv;
  } else {
    const double inv = 1.0 / std::sqrt(gag);
    for (double& v : ag) v *= inv;
  }

  // x+ = x - (1/(q+1)) A g~ ;  A+ = q^2/(q^2-1) (A - 2/(q+1) (Ag~)(Ag~)^T)
  kern::axpy(-1.0 / (qd + 1.0), ag.data(), next.ellipsoid_center.data(), q);
  kern::rank1_downdate(next.ellipsoid_shape.data(), ag.data(),
                       qd * qd / (qd * qd - 1.0), 2.0 / (qd + 1.0), q);
  repair_spd(next.ellipsoid_shape, q);
  project(next.ellipsoid_center, next.box_lo, next.box_hi, next.multipliers);
  return next;
}

double ellipsoid_log_volume(const DualState& state) {
  double log_det = 0.0;
  if (!cholesky_ok(state.ellipsoid_shape, state.dim(), &log_det))
    throw ConvergenceFailure("ellipsoid_log_volume: shape not SPD");
  return 0.5 * log_det;
}

bool center_in_box(const DualState& state, double tol, std::size_t* coord,
                   bool* low_side) {
  double worst = tol;
  bool ok = true;
  for (std::size_t i = 0; i < state.dim(); ++i) {
    const double below = state.box_lo[i] - state.ellipsoid_center[i];
    const double above = state.ellipsoid_center[i] - state.box_hi[i];
    if (below > worst) {
      worst = below;
      ok = false;
      if (coord) *coord = i;
      if (low_side) *low_side = true;
    }
    if (above > worst) {
      worst = above;
      ok = false;
      if (coord) *coord = i;
      if (low_side) *low_side = false;
    }
  }
  return ok;
}

}  // namespace rwpcn
