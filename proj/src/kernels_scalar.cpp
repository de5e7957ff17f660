#include "rwpcn/kernels.hpp"

namespace rwpcn::kern::ref {

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void matvec(const double* a, const double* x, double* y, std::size_t n) {
  for (std::size_t r = 0; r < n; ++r) {
    const double* row = a + r * n;
    double acc = 0.0;
    for (std::size_t c = 0; c < n; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
}

void axpy(double c, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += c * x[i];
}

void rank1_downdate(double* a, const double* b, double scale, double coef,
                    std::size_t n) {
  for (std::size_t r = 0; r < n; ++r) {
    double* row = a + r * n;
    const double br = coef * b[r];
    for (std::size_t c = 0; c < n; ++c) row[c] = scale * (row[c] - br * b[c]);
  }
}

}  // namespace rwpcn::kern::ref
