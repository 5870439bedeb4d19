#pragma once

#include <cstddef>
#include <string>

// Dense double-precision inner loops used by the model forward/backward.
// Scalar reference implementations always exist; on x86-64 with AVX2 a
// vectorized variant is selected at runtime. The two variants may differ in
// summation order, so cross-variant tests compare with a tolerance; within a
// single run the selected variant is fixed, keeping runs bit-reproducible.

namespace glitter::kernels {

enum class Backend { Auto, Scalar, Avx2 };

// Selects the active backend. Auto picks the best supported one.
// Throws ConfigError if an unsupported backend is forced.
void set_backend(Backend b);
Backend active_backend();
std::string backend_name();

// y[i] += a * x[i]
void axpy(double a, const double* x, double* y, size_t n);

// sum_i x[i] * y[i]
double dot(const double* x, const double* y, size_t n);

// x[i] *= a
void scale(double a, double* x, size_t n);

// reference implementations, exposed for equivalence tests
namespace scalar {
void axpy(double a, const double* x, double* y, size_t n);
double dot(const double* x, const double* y, size_t n);
void scale(double a, double* x, size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
void axpy(double a, const double* x, double* y, size_t n);
double dot(const double* x, const double* y, size_t n);
void scale(double a, double* x, size_t n);
}  // namespace avx2
bool avx2_supported();
#endif

}  // namespace glitter::kernels
