#pragma once
// Dense vector/matrix kernels used by the dual-descent inner loops.
//
// Each kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant selected at runtime. The two are equivalence-tested; force_isa()
// lets tests (and benchmarks) pin a path.

#include <cstddef>

namespace rwpcn::kern {

enum class Isa { scalar, avx2 };

// ISA chosen at startup from CPU capabilities (or overridden by force_isa).
Isa active_isa();
void force_isa(Isa isa);
bool cpu_has_avx2();

double dot(const double* a, const double* b, std::size_t n);

// y = A x, A row-major n x n (symmetric in our use, full storage).
void matvec(const double* a, const double* x, double* y, std::size_t n);

// y += c * x
void axpy(double c, const double* x, double* y, std::size_t n);

// A = scale * (A - coef * b b^T), symmetric rank-one downdate.
void rank1_downdate(double* a, const double* b, double scale, double coef,
                    std::size_t n);

namespace ref {
double dot(const double* a, const double* b, std::size_t n);
void matvec(const double* a, const double* x, double* y, std::size_t n);
void axpy(double c, const double* x, double* y, std::size_t n);
void rank1_downdate(double* a, const double* b, double scale, double coef,
                    std::size_t n);
}  // namespace ref

#if defined(__x86_64__) || defined(_M_X64)
#define RWPCN_X86_64 1
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void matvec(const double* a, const double* x, double* y, std::size_t n);
void axpy(double c, const double* x, double* y, std::size_t n);
void rank1_downdate(double* a, const double* b, double scale, double coef,
                    std::size_t n);
}  // namespace avx2
#endif

}  // namespace rwpcn::kern
