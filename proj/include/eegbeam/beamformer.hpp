#pragma once

#include <cstdint>
#include <vector>

#include "eegbeam/covstream.hpp"
#include "eegbeam/eig3.hpp"
#include "eegbeam/mat.hpp"

namespace eegbeam::beamformer {

struct LeadField {
    std::size_t electrodes = 0;
    std::vector<Vec3> points;
    std::vector<Mat> gains; // one k x 3 matrix per point
};

struct Orientation {
    Vec3 eta{};
    bool degenerate = false;
};

struct SourceEstimate {
    std::size_t point = 0;
    Vec3 orientation{};
    std::vector<double> series;
    double activity = 0;
    bool degenerate = false;
};

enum class ScanMode { accelerated, traditional };

// Per-stage multiply-add and wall-time totals accumulated across one scan.
struct ScanStats {
    std::uint64_t orientation_macs = 0;
    std::uint64_t weight_macs = 0;
    std::uint64_t reconstruct_macs = 0; // projection only
    std::uint64_t collapse_macs = 0;    // traditional 3-to-1 norm collapse
    double orientation_ms = 0;
    double weight_ms = 0;
    double reconstruct_ms = 0;
    double collapse_ms = 0;
    std::size_t degenerate_points = 0;
};

// rank(L) = 3 guard: smallest singular value > 1e-10 * largest.
bool leadfield_full_rank(const Mat& l);

// A = L^T Rinv L, symmetrized as (A + A^T)/2.
eig3::Sym3 gram3(const Mat& l, const Mat& rinv);

// Closed-form path: smallest eigenvector of gram3. Throws NumericError on a
// rank-deficient lead field.
Orientation aori_orientation(const Mat& l, const Mat& rinv);

// Iterative reference path: same quantity via Jacobi rotations.
Orientation reference_orientation(const Mat& l, const Mat& rinv);

// l = L * eta, the 3-to-1 lead field collapse.
std::vector<double> scalar_leadfield(const Mat& l, const Vec3& eta);

// Vector form: w = Rinv l / (l^T Rinv l). Throws NumericError when the
// denominator vanishes (unresolvable source).
std::vector<double> lcmv_weights(const std::vector<double>& l, const Mat& rinv);

// Matrix form: W = Rinv L (L^T Rinv L)^-1.
Mat lcmv_weight_matrix(const Mat& l, const Mat& rinv);

// series(t) = w^T y(t); activity = sum_t |series(t)|. point/orientation are
// left for the caller to fill.
SourceEstimate reconstruct(const std::vector<double>& w, const covstream::EegWindow& y);

// One estimate per grid point, ordered by point index. Degenerate points
// (rank-deficient lead field, singular Gram) are flagged with zero series
// instead of aborting the scan.
std::vector<SourceEstimate> scan_grid(const LeadField& lf, const Mat& rinv,
                                      const covstream::EegWindow& y, ScanMode mode,
                                      ScanStats* stats = nullptr);

// Point indices by descending activity; ties keep the lower index first.
std::vector<std::size_t> rank_sources(const std::vector<SourceEstimate>& estimates);

} // namespace eegbeam::beamformer
