#include "eegbeam/mat.hpp"

#include <cmath>

#include "eegbeam/kernels.hpp"

namespace eegbeam {

double frobenius_norm(const Mat& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a.data()[i] * a.data()[i];
    return std::sqrt(s);
}

double frobenius_distance(const Mat& a, const Mat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ParameterError("frobenius_distance: shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a.data()[i] - b.data()[i];
        s += d * d;
    }
    return std::sqrt(s);
}

Mat matmul(const Mat& a, const Mat& b) {
    if (a.cols() != b.rows()) throw ParameterError("matmul: shape mismatch");
    Mat out(a.rows(), b.cols());
    // a_row . b_col via axpy over b rows keeps the access contiguous.
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* orow = out.row(i);
        const double* arow = a.row(i);
        for (std::size_t p = 0; p < a.cols(); ++p)
            kern::axpy(orow, arow[p], b.row(p), b.cols());
    }
    return out;
}

Mat transpose(const Mat& a) {
    Mat out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
    return out;
}

double inverse_residual(const Mat& a, const Mat& ainv) {
    Mat prod = matmul(a, ainv);
    for (std::size_t i = 0; i < prod.rows(); ++i) prod(i, i) -= 1.0;
    return frobenius_norm(prod);
}

} // namespace eegbeam
