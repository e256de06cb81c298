// NEON variants for aarch64, where Advanced SIMD is baseline.

#include "kernels_impl.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>
#include <cstddef>

namespace eegbeam::kern::detail {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    }
    for (; i + 2 <= n; i += 2) acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy_neon(double* y, double alpha, const double* x, std::size_t n) {
    float64x2_t va = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_neon(const double* a, std::size_t rows, std::size_t cols, const double* x,
               double* y) {
    for (std::size_t r = 0; r < rows; ++r) y[r] = dot_neon(a + r * cols, x, cols);
}

void ger_neon(double* a, std::size_t rows, std::size_t cols, double alpha, const double* u,
              const double* v) {
    for (std::size_t r = 0; r < rows; ++r) {
        double coef = alpha * u[r];
        float64x2_t vc = vdupq_n_f64(coef);
        double* arow = a + r * cols;
        std::size_t c = 0;
        for (; c + 2 <= cols; c += 2)
            vst1q_f64(arow + c, vfmaq_f64(vld1q_f64(arow + c), vc, vld1q_f64(v + c)));
        for (; c < cols; ++c) arow[c] += coef * v[c];
    }
}

double sum_abs_neon(const double* x, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vabsq_f64(vld1q_f64(x + i)));
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) s += std::fabs(x[i]);
    return s;
}

void scale_neon(double* x, double alpha, std::size_t n) {
    float64x2_t va = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(x + i, vmulq_f64(va, vld1q_f64(x + i)));
    for (; i < n; ++i) x[i] *= alpha;
}

const Ops neon_table = {dot_neon, axpy_neon, gemv_neon, ger_neon, sum_abs_neon, scale_neon};

} // namespace

const Ops* neon_ops() { return &neon_table; }

} // namespace eegbeam::kern::detail

#else

namespace eegbeam::kern::detail {

const Ops* neon_ops() { return nullptr; }

} // namespace eegbeam::kern::detail

#endif
