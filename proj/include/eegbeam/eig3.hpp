#pragma once

#include <array>

#include "eegbeam/mat.hpp"

namespace eegbeam::eig3 {

// Symmetric 3x3, unique entries only.
struct Sym3 {
    double a11 = 0, a22 = 0, a33 = 0;
    double a12 = 0, a13 = 0, a23 = 0;

    static Sym3 from_rows(const std::array<std::array<double, 3>, 3>& m) {
        return {m[0][0], m[1][1], m[2][2], m[0][1], m[0][2], m[1][2]};
    }

    Vec3 apply(const Vec3& v) const {
        return {a11 * v[0] + a12 * v[1] + a13 * v[2],
                a12 * v[0] + a22 * v[1] + a23 * v[2],
                a13 * v[0] + a23 * v[1] + a33 * v[2]};
    }

    double norm_fro() const;
    bool finite() const;
};

struct EigvecResult {
    Vec3 v{};
    bool degenerate = false;
};

struct EigenSystem3 {
    std::array<double, 3> values{};  // ascending
    std::array<Vec3, 3> vectors{};   // vectors[i] pairs with values[i]
    bool degenerate = false;
};

// Trigonometric closed form; ascending order. Throws DataError on non-finite
// input.
std::array<double, 3> eigvals_sym3(const Sym3& a);

// Unit eigenvector for a given eigenvalue via the shifted-matrix case
// dispatch; canonical sign. degenerate flags repeated eigenvalues and
// fallback paths.
EigvecResult eigvec_sym3(const Sym3& a, double lambda);

// Smallest eigenvalue's eigenvector (the orientation solve).
EigvecResult smallest_eigvec(const Sym3& a);

// All three pairs via the closed-form path.
EigenSystem3 eigensystem_sym3(const Sym3& a);

// Cyclic Jacobi rotations; the iterative reference used by the traditional
// pipeline and as the test oracle.
EigenSystem3 jacobi_sym3(const Sym3& a);

// ||A v - lambda v||_2.
double eig_residual(const Sym3& a, double lambda, const Vec3& v);

} // namespace eegbeam::eig3
