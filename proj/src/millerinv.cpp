#include "eegbeam/millerinv.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "eegbeam/errors.hpp"
#include "eegbeam/flops.hpp"
#include "eegbeam/kernels.hpp"

namespace eegbeam::millerinv {

namespace {

void symmetrize(Mat& a) {
    const std::size_t k = a.rows();
    flops::add(k * (k + 1) / 2);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i; j < k; ++j)
            a(i, j) = a(j, i) = 0.5 * (a(i, j) + a(j, i));
}

void refresh_or_fallback(covstream::CovarianceState& state, bool is_fallback) {
    if (is_fallback) state.miller_fallbacks += 1;
    state.inverse_valid = false;
    state.inverse = direct_inverse(covstream::covariance(state));
    symmetrize(state.inverse);
    state.inverse_valid = true;
    if (!is_fallback) state.refreshes += 1;
}

void maybe_refresh(covstream::CovarianceState& state) {
    if (state.refresh_period > 0 && state.updates_applied % state.refresh_period == 0)
        refresh_or_fallback(state, false);
}

} // namespace

std::vector<RankOneTerm> rank_one_terms(const Mat& h) {
    if (h.rows() != h.cols()) throw ParameterError("rank_one_terms: matrix must be square");
    if (!h.finite()) throw DataError("rank_one_terms: non-finite entries");
    const std::size_t k = h.rows();
    std::vector<RankOneTerm> terms;
    for (std::size_t j = 0; j < k; ++j) {
        bool nonzero = false;
        for (std::size_t i = 0; i < k; ++i)
            if (h(i, j) != 0.0) {
                nonzero = true;
                break;
            }
        if (!nonzero) continue;
        RankOneTerm t;
        t.column = j;
        t.values.resize(k);
        for (std::size_t i = 0; i < k; ++i) t.values[i] = h(i, j);
        terms.push_back(std::move(t));
    }
    return terms;
}

Mat miller_step(const Mat& cinv, const RankOneTerm& term) {
    const std::size_t k = cinv.rows();
    if (cinv.cols() != k) throw ParameterError("miller_step: inverse must be square");
    if (term.values.size() != k || term.column >= k)
        throw ParameterError("miller_step: term shape mismatch");

    // C^-1 E = u e_i^T with u = C^-1 h, so tr(C^-1 E) = u[i] and the
    // correction is v * u * (row i of C^-1).
    std::vector<double> u(k);
    kern::gemv(cinv.data(), k, k, term.values.data(), u.data());
    double trace = u[term.column];
    double unorm = std::sqrt(kern::dot(u.data(), u.data(), k));

    double pivot = 1.0 + trace;
    if (std::fabs(pivot) <= 1e-10 * (1.0 + unorm))
        throw NumericError("miller_step: singular update at column " +
                           std::to_string(term.column));

    std::vector<double> irow(cinv.row(term.column), cinv.row(term.column) + k);
    Mat out = cinv;
    kern::ger(out.data(), k, k, -1.0 / pivot, u.data(), irow.data());
    return out;
}

Mat apply_sum(const Mat& cinv, const Mat& h) {
    if (cinv.rows() != cinv.cols() || h.rows() != h.cols() || cinv.rows() != h.rows())
        throw ParameterError("apply_sum: shape mismatch");
    Mat out = cinv;
    for (const RankOneTerm& t : rank_one_terms(h)) out = miller_step(out, t);
    return out;
}

void miller_step_symmetric(Mat& cinv, const double* x, double sigma) {
    const std::size_t k = cinv.rows();
    std::vector<double> u(k);
    kern::gemv(cinv.data(), k, k, x, u.data());
    double trace = sigma * kern::dot(x, u.data(), k);
    double unorm = std::sqrt(kern::dot(u.data(), u.data(), k));
    double xnorm = std::sqrt(kern::dot(x, x, k));

    double pivot = 1.0 + trace;
    if (std::fabs(pivot) <= 1e-10 * (1.0 + std::fabs(sigma) * unorm * xnorm))
        throw NumericError("miller_step_symmetric: singular update");

    // (C + sigma x x^T)^-1 = C^-1 - (sigma/pivot) u u^T
    kern::ger(cinv.data(), k, k, -sigma / pivot, u.data(), u.data());
}

Mat direct_inverse(const Mat& c) {
    const std::size_t k = c.rows();
    if (c.cols() != k || k == 0) throw ParameterError("direct_inverse: matrix must be square");
    if (!c.finite()) throw DataError("direct_inverse: non-finite entries");

    const double pivot_floor = 1e-13 * frobenius_norm(c);

    Mat aug(k, 2 * k);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) aug(i, j) = c(i, j);
        aug(i, k + i) = 1.0;
    }

    for (std::size_t col = 0; col < k; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < k; ++r)
            if (std::fabs(aug(r, col)) > std::fabs(aug(piv, col))) piv = r;
        if (std::fabs(aug(piv, col)) <= pivot_floor)
            throw NumericError("direct_inverse: matrix is singular to working precision");
        if (piv != col)
            for (std::size_t j = 0; j < 2 * k; ++j) std::swap(aug(col, j), aug(piv, j));

        kern::scale(aug.row(col), 1.0 / aug(col, col), 2 * k);
        for (std::size_t r = 0; r < k; ++r) {
            if (r == col) continue;
            double f = aug(r, col);
            if (f != 0.0) kern::axpy(aug.row(r), -f, aug.row(col), 2 * k);
        }
    }

    Mat out(k, k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) out(i, j) = aug(i, k + j);
    return out;
}

void recursive_inverse_slide(covstream::CovarianceState& state,
                             const covstream::SlideDelta& delta) {
    if (!state.inverse_valid)
        throw ParameterError("recursive_inverse_slide: state has no valid inverse");
    const std::size_t k = state.k, cy = state.cy;
    if (delta.added.rows() != k || delta.added.cols() != cy ||
        delta.evicted.rows() != k || delta.evicted.cols() != cy)
        throw ParameterError("recursive_inverse_slide: delta shape mismatch");

    const double w = 1.0 / static_cast<double>(state.ns - 1);
    std::vector<double> x(k);
    try {
        // Additions first, evictions second: keeps intermediates positive
        // definite longer.
        for (std::size_t j = 0; j < cy; ++j) {
            for (std::size_t i = 0; i < k; ++i) x[i] = delta.added(i, j);
            miller_step_symmetric(state.inverse, x.data(), w);
        }
        for (std::size_t j = 0; j < cy; ++j) {
            for (std::size_t i = 0; i < k; ++i) x[i] = delta.evicted(i, j);
            miller_step_symmetric(state.inverse, x.data(), -w);
        }
        symmetrize(state.inverse);
    } catch (const NumericError&) {
        refresh_or_fallback(state, true);
        return;
    }
    maybe_refresh(state);
}

void recursive_inverse_slide(covstream::CovarianceState& state, const Mat& delta_h) {
    if (!state.inverse_valid)
        throw ParameterError("recursive_inverse_slide: state has no valid inverse");
    if (delta_h.rows() != state.k || delta_h.cols() != state.k)
        throw ParameterError("recursive_inverse_slide: delta shape mismatch");

    try {
        state.inverse = apply_sum(state.inverse, delta_h);
        symmetrize(state.inverse);
    } catch (const NumericError&) {
        refresh_or_fallback(state, true);
        return;
    }
    maybe_refresh(state);
}

} // namespace eegbeam::millerinv
