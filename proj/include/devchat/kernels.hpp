#pragma once

// Dense double-precision inner loops used by the model fitting, correlation
// and resampling code. Every kernel has a portable scalar reference
// implementation; on x86-64 hosts that report AVX2+FMA at runtime an
// intrinsics variant is selected instead. Both variants must agree to
// rounding (see tests/unit/test_kernels.cpp).

#include <cstddef>
#include <span>
#include <string_view>

namespace devchat::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa);

// Best instruction set supported by this CPU and build. Setting the
// environment variable DEVCHAT_FORCE_SCALAR=1 pins the scalar path.
Isa detected_isa();

// Instruction set currently used by the dispatching entry points below.
Isa active_isa();

// Override the dispatch target. Throws std::invalid_argument when the
// requested set is not available on this host.
void set_active_isa(Isa isa);

// sum_i a[i] * b[i]
double dot(std::span<const double> a, std::span<const double> b);

// sum_i (a[i] - b[i])^2
double squared_distance(std::span<const double> a, std::span<const double> b);

// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

// Upper triangle of the row-major n x n matrix `gram` += alpha * x x^T,
// where n = x.size(). The strict lower triangle is left untouched.
void syr_upper(double alpha, std::span<const double> x, std::span<double> gram);

// Per-ISA entry points, exposed for equivalence testing.
namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void syr_upper(double alpha, const double* x, double* gram, std::size_t n);
}  // namespace scalar

namespace avx2 {
bool available();
double dot(const double* a, const double* b, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void syr_upper(double alpha, const double* x, double* gram, std::size_t n);
}  // namespace avx2

}  // namespace devchat::kernels
