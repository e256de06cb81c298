#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "eegbeam/errors.hpp"

namespace eegbeam {

// Dense row-major double matrix. Deliberately minimal: the heavy lifting is
// done by the kern:: primitives on raw pointers.
class Mat {
public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Mat identity(std::size_t n) {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* row(std::size_t r) { return data_.data() + r * cols_; }
    const double* row(std::size_t r) const { return data_.data() + r * cols_; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::size_t size() const { return data_.size(); }

    bool finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

double frobenius_norm(const Mat& a);
// ||a - b||_F; shapes must match.
double frobenius_distance(const Mat& a, const Mat& b);
Mat matmul(const Mat& a, const Mat& b);
Mat transpose(const Mat& a);
// max_ij |(a*b - I)_ij| style residual, as Frobenius norm of a*b - I.
double inverse_residual(const Mat& a, const Mat& ainv);

using Vec3 = std::array<double, 3>;

inline double dot3(const Vec3& a, const Vec3& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline double norm3(const Vec3& a) { return std::sqrt(dot3(a, a)); }

inline Vec3 cross3(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline Vec3 sub3(const Vec3& a, const Vec3& b) {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

inline Vec3 scaled3(const Vec3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }

inline Vec3 normalized3(const Vec3& a) {
    double n = norm3(a);
    if (n == 0.0) throw NumericError("cannot normalize zero vector");
    return scaled3(a, 1.0 / n);
}

// Canonical sign: largest-magnitude component is non-negative; ties resolved
// toward the lowest index.
inline Vec3 canonical_sign3(const Vec3& v) {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < 3; ++i)
        if (std::fabs(v[i]) > std::fabs(v[arg])) arg = i;
    if (v[arg] < 0.0) return {-v[0], -v[1], -v[2]};
    return v;
}

} // namespace eegbeam
