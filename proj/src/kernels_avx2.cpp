#include "rwpcn/kernels.hpp"

#if defined(RWPCN_X86_64)
#include <immintrin.h>

namespace rwpcn::kern::avx2 {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d va = _mm256_loadu_pd(a + i);
    __m256d vb = _mm256_loadu_pd(b + i);
    acc = _mm256_fmadd_pd(va, vb, acc);
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += a[i] * b[i];
  return hsum(acc) + tail;
}

void matvec(const double* a, const double* x, double* y, std::size_t n) {
  for (std::size_t r = 0; r < n; ++r) y[r] = dot(a + r * n, x, n);
}

void axpy(double c, const double* x, double* y, std::size_t n) {
  const __m256d vc = _mm256_set1_pd(c);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    __m256d vx = _mm256_loadu_pd(x + i);
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(vc, vx, vy));
  }
  for (; i < n; ++i) y[i] += c * x[i];
}

void rank1_downdate(double* a, const double* b, double scale, double coef,
                    std::size_t n) {
  const __m256d vscale = _mm256_set1_pd(scale);
  for (std::size_t r = 0; r < n; ++r) {
    double* row = a + r * n;
    const double brc = coef * b[r];
    const __m256d vbr = _mm256_set1_pd(brc);
    std::size_t c = 0;
    for (; c + 4 <= n; c += 4) {
      __m256d vrow = _mm256_loadu_pd(row + c);
      __m256d vb = _mm256_loadu_pd(b + c);
      vrow = _mm256_fnmadd_pd(vbr, vb, vrow);
      _mm256_storeu_pd(row + c, _mm256_mul_pd(vscale, vrow));
    }
    for (; c < n; ++c) row[c] = scale * (row[c] - brc * b[c]);
  }
}

}  // namespace rwpcn::kern::avx2

#endif  // RWPCN_X86_64
