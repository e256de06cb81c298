// AVX2+FMA variants. This translation unit is compiled with -mavx2 -mfma and
// is only entered through the dispatch table after a runtime CPU check.

#include "kernels_impl.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>
#include <cstddef>

namespace eegbeam::kern::detail {
namespace {

inline double hsum256(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    double acc = hsum256(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy_avx2(double* y, double alpha, const double* x, std::size_t n) {
    __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_avx2(const double* a, std::size_t rows, std::size_t cols, const double* x,
               double* y) {
    for (std::size_t r = 0; r < rows; ++r) y[r] = dot_avx2(a + r * cols, x, cols);
}

void ger_avx2(double* a, std::size_t rows, std::size_t cols, double alpha, const double* u,
              const double* v) {
    for (std::size_t r = 0; r < rows; ++r) {
        double coef = alpha * u[r];
        __m256d vc = _mm256_set1_pd(coef);
        double* arow = a + r * cols;
        std::size_t c = 0;
        for (; c + 4 <= cols; c += 4) {
            __m256d va = _mm256_loadu_pd(arow + c);
            va = _mm256_fmadd_pd(vc, _mm256_loadu_pd(v + c), va);
            _mm256_storeu_pd(arow + c, va);
        }
        for (; c < cols; ++c) arow[c] += coef * v[c];
    }
}

double sum_abs_avx2(const double* x, std::size_t n) {
    const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_add_pd(acc, _mm256_and_pd(mask, _mm256_loadu_pd(x + i)));
    double s = hsum256(acc);
    for (; i < n; ++i) s += std::fabs(x[i]);
    return s;
}

void scale_avx2(double* x, double alpha, std::size_t n) {
    __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) x[i] *= alpha;
}

const Ops avx2_table = {dot_avx2, axpy_avx2, gemv_avx2, ger_avx2, sum_abs_avx2, scale_avx2};

} // namespace

const Ops* avx2_ops() { return &avx2_table; }

bool cpu_has_avx2() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

} // namespace eegbeam::kern::detail

#else

namespace eegbeam::kern::detail {

const Ops* avx2_ops() { return nullptr; }
bool cpu_has_avx2() { return false; }

} // namespace eegbeam::kern::detail

#endif
