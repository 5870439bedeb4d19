#include "glitter/kernels.hpp"

#include "glitter/errors.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#endif

namespace glitter::kernels {

namespace scalar {

void axpy(double a, const double* x, double* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double dot(const double* x, const double* y, size_t n) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

void scale(double a, double* x, size_t n) {
    for (size_t i = 0; i < n; ++i) x[i] *= a;
}

}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)

bool avx2_supported() { return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"); }

namespace avx2 {

__attribute__((target("avx2,fma"))) void axpy(double a, const double* x, double* y, size_t n) {
    __m256d va = _mm256_set1_pd(a);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

__attribute__((target("avx2,fma"))) double dot(const double* x, const double* y, size_t n) {
    __m256d acc = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
    }
    double lanes[4];
    _mm256_storeu_pd(lanes, acc);
    double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

__attribute__((target("avx2,fma"))) void scale(double a, double* x, size_t n) {
    __m256d va = _mm256_set1_pd(a);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    }
    for (; i < n; ++i) x[i] *= a;
}

}  // namespace avx2

#endif  // x86-64

namespace {

struct Dispatch {
    void (*axpy)(double, const double*, double*, size_t);
    double (*dot)(const double*, const double*, size_t);
    void (*scale)(double, double*, size_t);
    Backend which;
};

Dispatch pick(Backend b) {
#if defined(__x86_64__) || defined(_M_X64)
    if (b == Backend::Avx2 || (b == Backend::Auto && avx2_supported())) {
        if (!avx2_supported()) throw ConfigError("AVX2 backend requested but not supported by this CPU");
        return {avx2::axpy, avx2::dot, avx2::scale, Backend::Avx2};
    }
#else
    if (b == Backend::Avx2) throw ConfigError("AVX2 backend requested on a non-x86 build");
#endif
    return {scalar::axpy, scalar::dot, scalar::scale, Backend::Scalar};
}

Dispatch g_dispatch = pick(Backend::Auto);

}  // namespace

void set_backend(Backend b) { g_dispatch = pick(b); }

Backend active_backend() { return g_dispatch.which; }

std::string backend_name() { return g_dispatch.which == Backend::Avx2 ? "avx2" : "scalar"; }

void axpy(double a, const double* x, double* y, size_t n) { g_dispatch.axpy(a, x, y, n); }

double dot(const double* x, const double* y, size_t n) { return g_dispatch.dot(x, y, n); }

void scale(double a, double* x, size_t n) { g_dispatch.scale(a, x, n); }

}  // namespace glitter::kernels
