#include "rwpcn/kernels.hpp"

namespace rwpcn::kern {

namespace {

Isa detect() {
#if defined(RWPCN_X86_64)
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
    return Isa::avx2;
#endif
  return Isa::scalar;
}

Isa& current() {
  static Isa isa = detect();
  return isa;
}

}  // namespace

bool cpu_has_avx2() {
#if defined(RWPCN_X86_64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa active_isa() { return current(); }

void force_isa(Isa isa) {
#if defined(RWPCN_X86_64)
  current() = (isa == Isa::avx2 && cpu_has_avx2()) ? Isa::avx2 : Isa::scalar;
#else
  (void)isa;
  current() = Isa::scalar;
#endif
}

double dot(const double* a, const double* b, std::size_t n) {
#if defined(RWPCN_X86_64)
  if (current() == Isa::avx2) return avx2::dot(a, b, n);
#endif
  return ref::dot(a, b, n);
}

void matvec(const double* a, const double* x, double* y, std::size_t n) {
#if defined(RWPCN_X86_64)
  if (current() == Isa::avx2) return avx2::matvec(a, x, y, n);
#endif
  ref::matvec(a, x, y, n);
}

void axpy(double c, const double* x, double* y, std::size_t n) {
#if defined(RWPCN_X86_64)
  if (current() == Isa::avx2) return avx2::axpy(c, x, y, n);
#endif
  ref::axpy(c, x, y, n);
}

void rank1_downdate(double* a, const double* b, double scale, double coef,
                    std::size_t n) {
#if defined(RWPCN_X86_64)
  if (current() == Isa::avx2) return avx2::rank1_downdate(a, b, scale, coef, n);
#endif
  ref::rank1_downdate(a, b, scale, coef, n);
}

}  // namespace rwpcn::kern
