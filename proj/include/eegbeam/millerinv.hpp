#pragma once

#include <cstddef>
#include <vector>

#include "eegbeam/covstream.hpp"
#include "eegbeam/mat.hpp"

namespace eegbeam::millerinv {

// E = values * e_column^T: a matrix whose only nonzero column is `values`.
struct RankOneTerm {
    std::size_t column = 0;
    std::vector<double> values;
};

// Column decomposition H = sum_i E_i; zero columns are skipped.
std::vector<RankOneTerm> rank_one_terms(const Mat& h);

// One rank-one update: (C + E)^-1 from C^-1, with v = 1/(1 + tr(C^-1 E)).
// Throws NumericError on pivot breakdown (|1 + tr| below
// 1e-10 * (1 + ||C^-1 E||_F)).
Mat miller_step(const Mat& cinv, const RankOneTerm& term);

// Fold miller_step over rank_one_terms(h): (G + H)^-1 from G^-1.
Mat apply_sum(const Mat& cinv, const Mat& h);

// Symmetric rank-one fast path, in place: cinv <- (C + sigma*x*x^T)^-1.
// Same pivot rule as miller_step. x has cinv.rows() entries.
void miller_step_symmetric(Mat& cinv, const double* x, double sigma);

// Pivoted Gauss-Jordan; throws NumericError when a pivot falls below
// 1e-13 * ||C||_F.
Mat direct_inverse(const Mat& c);

// Streaming maintainers: bring state.inverse up to date with a slide that
// covstream::slide already applied to the scatter. On pivot breakdown the
// inverse is recomputed directly from the current covariance and
// miller_fallbacks is bumped; a NumericError escapes only if that direct
// inversion fails too. Honors state.refresh_period.
//
// Block form: one Miller step per added sample (+1/(ns-1) x x^T), then one
// per evicted sample (-1/(ns-1) x x^T); 2*cy steps of O(k^2) each.
void recursive_inverse_slide(covstream::CovarianceState& state,
                             const covstream::SlideDelta& delta);

// Dense form: delta_h is the slide's scatter delta scaled by 1/(ns-1);
// applies the column decomposition via apply_sum (O(k^3); kept for the
// generic contract and ablation).
void recursive_inverse_slide(covstream::CovarianceState& state, const Mat& delta_h);

} // namespace eegbeam::millerinv
