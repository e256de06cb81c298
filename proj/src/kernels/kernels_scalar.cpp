#include <cmath>
#include <cstddef>

#include "kernels_impl.hpp"

// Reference kernels. Plain sequential loops; SIMD variants must match these
// within floating-point reassociation tolerance.

namespace eegbeam::kern::detail {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy_scalar(double* y, double alpha, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_scalar(const double* a, std::size_t rows, std::size_t cols, const double* x,
                 double* y) {
    for (std::size_t r = 0; r < rows; ++r) y[r] = dot_scalar(a + r * cols, x, cols);
}

void ger_scalar(double* a, std::size_t rows, std::size_t cols, double alpha, const double* u,
                const double* v) {
    for (std::size_t r = 0; r < rows; ++r) {
        double coef = alpha * u[r];
        double* arow = a + r * cols;
        for (std::size_t c = 0; c < cols; ++c) arow[c] += coef * v[c];
    }
}

double sum_abs_scalar(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::fabs(x[i]);
    return acc;
}

void scale_scalar(double* x, double alpha, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

} // namespace

const Ops scalar_ops = {dot_scalar, axpy_scalar, gemv_scalar,
                        ger_scalar, sum_abs_scalar, scale_scalar};

} // namespace eegbeam::kern::detail
