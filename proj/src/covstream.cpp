#include "eegbeam/covstream.hpp"

#include <cmath>

#include "eegbeam/errors.hpp"
#include "eegbeam/kernels.hpp"
#include "eegbeam/millerinv.hpp"

namespace eegbeam::covstream {

bool EegWindow::finite() const {
    for (double v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

Mat batch_covariance(const EegWindow& x, bool center) {
    if (x.channels < 1 || x.samples < 1)
        throw ParameterError("batch_covariance: empty window");
    if (center && x.samples < 2)
        throw ParameterError("batch_covariance: centering needs at least 2 samples");
    if (!x.finite()) throw DataError("batch_covariance: non-finite samples");

    const std::size_t k = x.channels, n = x.samples;
    const EegWindow* src = &x;
    EegWindow centered;
    if (center) {
        centered = x;
        for (std::size_t c = 0; c < k; ++c) {
            double* r = centered.row(c);
            double mean = 0.0;
            for (std::size_t t = 0; t < n; ++t) mean += r[t];
            mean /= static_cast<double>(n);
            for (std::size_t t = 0; t < n; ++t) r[t] -= mean;
        }
        src = &centered;
    }

    Mat cov(k, k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i; j < k; ++j)
            cov(i, j) = cov(j, i) = kern::dot(src->row(i), src->row(j), n);
    // A single-sample window exposes the raw scatter (no 1/(N-1) defined).
    if (n >= 2) kern::scale(cov.data(), 1.0 / static_cast<double>(n - 1), k * k);
    return cov;
}

CovarianceState init_state(const EegWindow& x, std::size_t cy, double ridge,
                           std::uint64_t refresh_period) {
    if (x.channels < 1 || x.samples < 1)
        throw ParameterError("init_state: empty window");
    if (x.samples < x.channels)
        throw ParameterError("init_state: window must hold at least k samples (rank requirement)");
    if (cy < 1 || 2 * cy >= x.samples)
        throw ParameterError("init_state: block size must satisfy 1 <= cy < ns/2");
    if (!std::isfinite(ridge) || ridge < 0)
        throw ParameterError("init_state: ridge must be finite and >= 0");
    if (!x.finite()) throw DataError("init_state: non-finite samples");

    CovarianceState s;
    s.k = x.channels;
    s.ns = x.samples;
    s.cy = cy;
    s.ridge = ridge;
    s.refresh_period = refresh_period;

    s.window = Mat(s.k, s.ns);
    for (std::size_t c = 0; c < s.k; ++c)
        for (std::size_t t = 0; t < s.ns; ++t) s.window(c, t) = x.at(c, t);

    s.scatter = Mat(s.k, s.k);
    for (std::size_t i = 0; i < s.k; ++i)
        for (std::size_t j = i; j < s.k; ++j)
            s.scatter(i, j) = s.scatter(j, i) =
                kern::dot(s.window.row(i), s.window.row(j), s.ns);

    try {
        s.inverse = millerinv::direct_inverse(covariance(s));
    } catch (const NumericError&) {
        throw NumericError("init_state: regularized covariance is singular; raise the ridge");
    }
    // The inverse of a symmetric matrix is symmetric; elimination round-off
    // must not leak into the maintained state.
    for (std::size_t i = 0; i < s.k; ++i)
        for (std::size_t j = i + 1; j < s.k; ++j)
            s.inverse(i, j) = s.inverse(j, i) = 0.5 * (s.inverse(i, j) + s.inverse(j, i));
    s.inverse_valid = true;
    return s;
}

SlideDelta slide(CovarianceState& state, const Mat& new_block) {
    if (state.k == 0) throw ParameterError("slide: state not initialized");
    if (new_block.rows() != state.k || new_block.cols() != state.cy)
        throw ParameterError("slide: block must be k x cy");
    if (!new_block.finite()) throw DataError("slide: non-finite block");

    const std::size_t k = state.k, cy = state.cy, ns = state.ns;

    SlideDelta d;
    d.evicted = Mat(k, cy);
    for (std::size_t j = 0; j < cy; ++j) {
        std::size_t col = (state.ring_head + j) % ns;
        for (std::size_t c = 0; c < k; ++c) d.evicted(c, j) = state.window(c, col);
    }
    d.added = new_block;

    d.scatter_delta = Mat(k, k);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i; j < k; ++j) {
            double add = kern::dot(d.added.row(i), d.added.row(j), cy);
            double old = kern::dot(d.evicted.row(i), d.evicted.row(j), cy);
            d.scatter_delta(i, j) = d.scatter_delta(j, i) = add - old;
        }
    }

    for (std::size_t idx = 0; idx < k * k; ++idx)
        state.scatter.data()[idx] += d.scatter_delta.data()[idx];
    for (std::size_t j = 0; j < cy; ++j) {
        std::size_t col = (state.ring_head + j) % ns;
        for (std::size_t c = 0; c < k; ++c) state.window(c, col) = new_block(c, j);
    }
    state.ring_head = (state.ring_head + cy) % ns;
    state.window_start += cy;
    state.updates_applied += 1;
    return d;
}

Mat covariance(const CovarianceState& state) {
    if (state.k == 0) throw ParameterError("covariance: state not initialized");
    Mat c = state.scatter;
    kern::scale(c.data(), 1.0 / static_cast<double>(state.ns - 1), state.k * state.k);
    for (std::size_t i = 0; i < state.k; ++i) c(i, i) += state.ridge;
    return c;
}

} // namespace eegbeam::covstream
