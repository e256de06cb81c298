#include "eegbeam/beamformer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "eegbeam/errors.hpp"
#include "eegbeam/flops.hpp"
#include "eegbeam/kernels.hpp"
#include "eegbeam/millerinv.hpp"

namespace eegbeam::beamformer {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void check_leadfield_shape(const Mat& l) {
    if (l.cols() != 3 || l.rows() == 0)
        throw ParameterError("lead field must be k x 3");
    if (!l.finite()) throw DataError("lead field has non-finite entries");
}

void check_rinv(const Mat& rinv, std::size_t k) {
    if (rinv.rows() != k || rinv.cols() != k)
        throw ParameterError("inverse covariance shape mismatch");
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i; j < k; ++j) {
            worst = std::max(worst, std::fabs(rinv(i, j) - rinv(j, i)));
            scale = std::max(scale, std::fabs(rinv(i, j)));
        }
    if (worst > 1e-8 * (1.0 + scale))
        throw ParameterError("inverse covariance is not symmetric");
}

// A = L^T Rinv L along with M = Rinv L (columns reused by the matrix-form
// weights).
eig3::Sym3 gram3_with_m(const Mat& l, const Mat& rinv, std::array<std::vector<double>, 3>& m) {
    const std::size_t k = l.rows();
    std::array<std::vector<double>, 3> lcol;
    for (std::size_t c = 0; c < 3; ++c) {
        lcol[c].resize(k);
        for (std::size_t r = 0; r < k; ++r) lcol[c][r] = l(r, c);
        m[c].resize(k);
        kern::gemv(rinv.data(), k, k, lcol[c].data(), m[c].data());
    }
    double a[3][3];
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t d = 0; d < 3; ++d) a[c][d] = kern::dot(lcol[c].data(), m[d].data(), k);
    eig3::Sym3 out;
    out.a11 = a[0][0];
    out.a22 = a[1][1];
    out.a33 = a[2][2];
    out.a12 = 0.5 * (a[0][1] + a[1][0]);
    out.a13 = 0.5 * (a[0][2] + a[2][0]);
    out.a23 = 0.5 * (a[1][2] + a[2][1]);
    return out;
}

Mat weight_matrix_from_m(const eig3::Sym3& a, const std::array<std::vector<double>, 3>& m,
                         std::size_t k) {
    Mat a3(3, 3);
    a3(0, 0) = a.a11;
    a3(1, 1) = a.a22;
    a3(2, 2) = a.a33;
    a3(0, 1) = a3(1, 0) = a.a12;
    a3(0, 2) = a3(2, 0) = a.a13;
    a3(1, 2) = a3(2, 1) = a.a23;
    Mat ainv;
    try {
        ainv = millerinv::direct_inverse(a3);
    } catch (const NumericError&) {
        throw NumericError("unresolvable source: singular 3x3 Gram matrix");
    }
    Mat w(k, 3);
    for (std::size_t r = 0; r < k; ++r)
        for (std::size_t c = 0; c < 3; ++c) {
            w(r, c) = m[0][r] * ainv(0, c) + m[1][r] * ainv(1, c) + m[2][r] * ainv(2, c);
        }
    flops::add(9 * k);
    return w;
}

SourceEstimate flagged_estimate(std::size_t point, std::size_t n) {
    SourceEstimate e;
    e.point = point;
    e.series.assign(n, 0.0);
    e.degenerate = true;
    return e;
}

} // namespace

bool leadfield_full_rank(const Mat& l) {
    check_leadfield_shape(l);
    // Singular values of L are the square roots of eigenvalues of L^T L.
    eig3::Sym3 g;
    const std::size_t k = l.rows();
    double a[3][3];
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t d = c; d < 3; ++d) {
            double acc = 0.0;
            for (std::size_t r = 0; r < k; ++r) acc += l(r, c) * l(r, d);
            a[c][d] = acc;
        }
    g.a11 = a[0][0];
    g.a22 = a[1][1];
    g.a33 = a[2][2];
    g.a12 = a[0][1];
    g.a13 = a[0][2];
    g.a23 = a[1][2];
    auto ev = eig3::eigvals_sym3(g);
    return ev[0] > 1e-20 * ev[2] && ev[2] > 0.0;
}

eig3::Sym3 gram3(const Mat& l, const Mat& rinv) {
    check_leadfield_shape(l);
    check_rinv(rinv, l.rows());
    std::array<std::vector<double>, 3> m;
    return gram3_with_m(l, rinv, m);
}

Orientation aori_orientation(const Mat& l, const Mat& rinv) {
    if (!leadfield_full_rank(l))
        throw NumericError("degenerate lead field: rank below 3");
    auto r = eig3::smallest_eigvec(gram3(l, rinv));
    return {r.v, r.degenerate};
}

Orientation reference_orientation(const Mat& l, const Mat& rinv) {
    if (!leadfield_full_rank(l))
        throw NumericError("degenerate lead field: rank below 3");
    eig3::Sym3 a = gram3(l, rinv);
    auto sys = eig3::jacobi_sym3(a);
    // Only multiplicity of the smallest eigenvalue makes the orientation
    // ambiguous.
    bool deg = sys.values[1] - sys.values[0] <= 1e-8 * (1.0 + a.norm_fro());
    return {sys.vectors[0], deg};
}

std::vector<double> scalar_leadfield(const Mat& l, const Vec3& eta) {
    check_leadfield_shape(l);
    std::vector<double> out(l.rows());
    kern::gemv(l.data(), l.rows(), 3, eta.data(), out.data());
    return out;
}

std::vector<double> lcmv_weights(const std::vector<double>& l, const Mat& rinv) {
    const std::size_t k = l.size();
    check_rinv(rinv, k);
    std::vector<double> u(k);
    kern::gemv(rinv.data(), k, k, l.data(), u.data());
    double denom = kern::dot(l.data(), u.data(), k);
    double lnorm2 = kern::dot(l.data(), l.data(), k);
    if (denom <= 1e-13 * lnorm2 * frobenius_norm(rinv))
        throw NumericError("unresolvable source: vanishing l^T Rinv l");
    kern::scale(u.data(), 1.0 / denom, k);
    return u;
}

Mat lcmv_weight_matrix(const Mat& l, const Mat& rinv) {
    check_leadfield_shape(l);
    check_rinv(rinv, l.rows());
    std::array<std::vector<double>, 3> m;
    eig3::Sym3 a = gram3_with_m(l, rinv, m);
    return weight_matrix_from_m(a, m, l.rows());
}

SourceEstimate reconstruct(const std::vector<double>& w, const covstream::EegWindow& y) {
    if (w.size() != y.channels) throw ParameterError("reconstruct: weight length mismatch");
    SourceEstimate est;
    est.series.assign(y.samples, 0.0);
    for (std::size_t c = 0; c < y.channels; ++c)
        kern::axpy(est.series.data(), w[c], y.row(c), y.samples);
    est.activity = kern::sum_abs(est.series.data(), est.series.size());
    return est;
}

std::vector<SourceEstimate> scan_grid(const LeadField& lf, const Mat& rinv,
                                      const covstream::EegWindow& y, ScanMode mode,
                                      ScanStats* stats) {
    if (lf.electrodes != y.channels)
        throw ParameterError("scan_grid: lead field/stream channel mismatch");
    if (lf.points.size() != lf.gains.size())
        throw ParameterError("scan_grid: malformed lead field");
    check_rinv(rinv, lf.electrodes);

    ScanStats local;
    ScanStats& st = stats ? *stats : local;
    const std::size_t n = y.samples;
    const std::size_t k = lf.electrodes;

    std::vector<SourceEstimate> out;
    out.reserve(lf.points.size());

    for (std::size_t p = 0; p < lf.points.size(); ++p) {
        const Mat& l = lf.gains[p];
        try {
            flops::Section sect;
            auto t0 = Clock::now();
            if (!leadfield_full_rank(l)) {
                out.push_back(flagged_estimate(p, n));
                st.degenerate_points += 1;
                continue;
            }
            std::array<std::vector<double>, 3> m;
            eig3::Sym3 a = gram3_with_m(l, rinv, m);

            Orientation ori;
            if (mode == ScanMode::accelerated) {
                auto r = eig3::smallest_eigvec(a);
                ori = {r.v, r.degenerate};
            } else {
                auto sys = eig3::jacobi_sym3(a);
                bool deg = sys.values[1] - sys.values[0] <= 1e-8 * (1.0 + a.norm_fro());
                ori = {sys.vectors[0], deg};
            }
            st.orientation_macs += sect.elapsed();
            st.orientation_ms += ms_since(t0);

            SourceEstimate est;
            if (mode == ScanMode::accelerated) {
                sect.restart();
                t0 = Clock::now();
                std::vector<double> l1 = scalar_leadfield(l, ori.eta);
                std::vector<double> w = lcmv_weights(l1, rinv);
                st.weight_macs += sect.elapsed();
                st.weight_ms += ms_since(t0);

                sect.restart();
                t0 = Clock::now();
                est = reconstruct(w, y);
                st.reconstruct_macs += sect.elapsed();
                st.reconstruct_ms += ms_since(t0);
            } else {
                sect.restart();
                t0 = Clock::now();
                Mat w = weight_matrix_from_m(a, m, k);
                st.weight_macs += sect.elapsed();
                st.weight_ms += ms_since(t0);

                // Project onto the three columns, then collapse to a
                // per-sample 3-component norm.
                sect.restart();
                t0 = Clock::now();
                std::array<std::vector<double>, 3> s3;
                std::array<std::vector<double>, 3> wcol;
                for (std::size_t c = 0; c < 3; ++c) {
                    wcol[c].resize(k);
                    for (std::size_t r = 0; r < k; ++r) wcol[c][r] = w(r, c);
                    s3[c].assign(n, 0.0);
                    for (std::size_t ch = 0; ch < k; ++ch)
                        kern::axpy(s3[c].data(), wcol[c][ch], y.row(ch), n);
                }
                st.reconstruct_macs += sect.elapsed();
                st.reconstruct_ms += ms_since(t0);

                sect.restart();
                t0 = Clock::now();
                est.series.resize(n);
                for (std::size_t t = 0; t < n; ++t)
                    est.series[t] = std::sqrt(s3[0][t] * s3[0][t] + s3[1][t] * s3[1][t] +
                                              s3[2][t] * s3[2][t]);
                flops::add(3 * static_cast<std::uint64_t>(n));
                est.activity = kern::sum_abs(est.series.data(), n);
                st.collapse_macs += sect.elapsed();
                st.collapse_ms += ms_since(t0);
            }
            est.point = p;
            est.orientation = ori.eta;
            est.degenerate = ori.degenerate;
            if (est.degenerate) st.degenerate_points += 1;
            out.push_back(std::move(est));
        } catch (const NumericError&) {
            out.push_back(flagged_estimate(p, n));
            st.degenerate_points += 1;
        }
    }
    return out;
}

std::vector<std::size_t> rank_sources(const std::vector<SourceEstimate>& estimates) {
    if (estimates.empty()) throw ParameterError("rank_sources: empty estimate list");
    std::vector<std::size_t> idx(estimates.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return estimates[a].activity > estimates[b].activity;
    });
    return idx;
}

} // namespace eegbeam::beamformer
