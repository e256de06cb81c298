#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "eegbeam/mat.hpp"

namespace eegbeam::covstream {

// Multichannel stream segment, channel-major: row(c) is channel c's samples.
struct EegWindow {
    std::size_t channels = 0;
    std::size_t samples = 0;
    double sample_rate = 0; // 0 = unknown
    std::vector<double> data;

    EegWindow() = default;
    EegWindow(std::size_t k, std::size_t n)
        : channels(k), samples(n), data(k * n, 0.0) {}

    double* row(std::size_t c) { return data.data() + c * samples; }
    const double* row(std::size_t c) const { return data.data() + c * samples; }
    double& at(std::size_t c, std::size_t t) { return data[c * samples + t]; }
    double at(std::size_t c, std::size_t t) const { return data[c * samples + t]; }
    bool finite() const;
};

// What one slide changed: dense scatter-unit delta plus the sample blocks
// that produced it (each k x cy, one column per sample).
struct SlideDelta {
    Mat scatter_delta;
    Mat evicted;
    Mat added;
};

struct CovarianceState {
    std::size_t k = 0;   // channels
    std::size_t ns = 0;  // window length in samples
    std::size_t cy = 0;  // samples exchanged per slide
    double ridge = 0;    // diagonal loading added at exposure

    Mat scatter;  // unnormalized X X^T over the current window
    Mat inverse;  // inverse of covariance(state); valid while inverse_valid
    bool inverse_valid = false;

    Mat window;                     // k x ns ring buffer of raw samples
    std::size_t ring_head = 0;      // column holding the oldest sample
    std::uint64_t window_start = 0; // stream index of the oldest sample

    std::uint64_t updates_applied = 0;
    std::uint64_t refresh_period = 4096; // slides between direct recomputes; 0 disables
    std::uint64_t miller_fallbacks = 0;
    std::uint64_t refreshes = 0;
};

// Batch covariance of one window; center subtracts per-channel means first
// (needs samples >= 2). Normalization 1/(samples-1).
Mat batch_covariance(const EegWindow& x, bool center);

// Build streaming state from an initial window of exactly ns samples.
// Requires ns >= channels, 1 <= cy < ns/2, ridge >= 0; inverts the initial
// covariance directly.
CovarianceState init_state(const EegWindow& x, std::size_t cy, double ridge,
                           std::uint64_t refresh_period = 4096);

// Advance the window by one block (k x cy, oldest-first columns): evicts the
// cy oldest samples, appends the block, updates the scatter. Does not touch
// state.inverse; pair with millerinv::recursive_inverse_slide.
SlideDelta slide(CovarianceState& state, const Mat& new_block);

// Normalized view: scatter/(ns-1) + ridge*I.
Mat covariance(const CovarianceState& state);

} // namespace eegbeam::covstream
