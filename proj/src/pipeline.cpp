#include "eegbeam/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "eegbeam/errors.hpp"
#include "eegbeam/flops.hpp"
#include "eegbeam/kernels.hpp"
#include "eegbeam/millerinv.hpp"

namespace eegbeam::pipeline {

namespace {

using nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

covstream::EegWindow slice_window(const covstream::EegWindow& y, std::size_t start,
                                  std::size_t len) {
    covstream::EegWindow out(y.channels, len);
    out.sample_rate = y.sample_rate;
    for (std::size_t c = 0; c < y.channels; ++c)
        for (std::size_t t = 0; t < len; ++t) out.at(c, t) = y.at(c, start + t);
    return out;
}

Mat block_from(const covstream::EegWindow& y, std::size_t start, std::size_t cy) {
    Mat b(y.channels, cy);
    for (std::size_t c = 0; c < y.channels; ++c)
        for (std::size_t j = 0; j < cy; ++j) b(c, j) = y.at(c, start + j);
    return b;
}

const char* mode_name(beamformer::ScanMode m) {
    return m == beamformer::ScanMode::accelerated ? "accelerated" : "traditional";
}

struct ArmResult {
    std::vector<beamformer::SourceEstimate> estimates;
    ordered_json json;
};

ordered_json points_json(const std::vector<beamformer::SourceEstimate>& ests) {
    ordered_json arr = ordered_json::array();
    for (const auto& e : ests) {
        arr.push_back({{"index", e.point},
                       {"activity", e.activity},
                       {"orientation", {e.orientation[0], e.orientation[1], e.orientation[2]}},
                       {"degenerate", e.degenerate}});
    }
    return arr;
}

ordered_json ranking_json(const std::vector<beamformer::SourceEstimate>& ests) {
    ordered_json arr = ordered_json::array();
    if (!ests.empty())
        for (std::size_t i : beamformer::rank_sources(ests)) arr.push_back(i);
    return arr;
}

ArmResult run_arm(const covstream::EegWindow& yc, const beamformer::LeadField& lf,
                  beamformer::ScanMode mode, std::size_t ns, std::size_t cy, double ridge,
                  std::uint64_t refresh, std::size_t slides) {
    std::uint64_t init_macs = 0, cov_macs = 0, inv_macs = 0;
    double init_ms = 0, cov_ms = 0, inv_ms = 0;
    std::uint64_t fallbacks = 0, refreshes = 0;
    Mat rinv;

    if (mode == beamformer::ScanMode::accelerated) {
        flops::Section sect;
        auto t0 = Clock::now();
        covstream::CovarianceState state =
            covstream::init_state(slice_window(yc, 0, ns), cy, ridge, refresh);
        init_macs = sect.elapsed();
        init_ms = ms_since(t0);

        for (std::size_t m = 0; m < slides; ++m) {
            Mat block = block_from(yc, ns + m * cy, cy);
            sect.restart();
            t0 = Clock::now();
            covstream::SlideDelta delta = covstream::slide(state, block);
            cov_macs += sect.elapsed();
            cov_ms += ms_since(t0);

            sect.restart();
            t0 = Clock::now();
            millerinv::recursive_inverse_slide(state, delta);
            inv_macs += sect.elapsed();
            inv_ms += ms_since(t0);
        }
        rinv = state.inverse;
        fallbacks = state.miller_fallbacks;
        refreshes = state.refreshes;
    } else {
        // Traditional arm: one batch covariance + direct inversion over the
        // final window (the same window the streaming arm ends on).
        covstream::EegWindow finalwin = slice_window(yc, slides * cy, ns);
        flops::Section sect;
        auto t0 = Clock::now();
        Mat c = covstream::batch_covariance(finalwin, false);
        for (std::size_t i = 0; i < c.rows(); ++i) c(i, i) += ridge;
        cov_macs = sect.elapsed();
        cov_ms = ms_since(t0);

        sect.restart();
        t0 = Clock::now();
        try {
            rinv = millerinv::direct_inverse(c);
        } catch (const NumericError&) {
            throw NumericError("covariance is singular; raise the ridge");
        }
        inv_macs = sect.elapsed();
        inv_ms = ms_since(t0);
        // Direct inversion leaves fp-level asymmetry; the scan requires a
        // symmetric inverse.
        for (std::size_t i = 0; i < rinv.rows(); ++i)
            for (std::size_t j = i + 1; j < rinv.cols(); ++j)
                rinv(i, j) = rinv(j, i) = 0.5 * (rinv(i, j) + rinv(j, i));
    }

    beamformer::ScanStats stats;
    ArmResult out;
    out.estimates = beamformer::scan_grid(lf, rinv, yc, mode, &stats);

    out.json = ordered_json{
        {"points", points_json(out.estimates)},
        {"ranking", ranking_json(out.estimates)},
        {"degenerate_points", stats.degenerate_points},
        {"counters",
         {{"slides", slides}, {"miller_fallbacks", fallbacks}, {"refreshes", refreshes}}},
        {"stage_macs",
         {{"init", init_macs},
          {"covariance_update", cov_macs},
          {"inverse_update", inv_macs},
          {"orientation", stats.orientation_macs},
          {"weights", stats.weight_macs},
          {"reconstruction", stats.reconstruct_macs},
          {"collapse", stats.collapse_macs}}},
        {"stage_ms",
         {{"init_ms", init_ms},
          {"covariance_update_ms", cov_ms},
          {"inverse_update_ms", inv_ms},
          {"orientation_ms", stats.orientation_ms},
          {"weights_ms", stats.weight_ms},
          {"reconstruction_ms", stats.reconstruct_ms},
          {"collapse_ms", stats.collapse_ms}}}};
    return out;
}

ordered_json truth_for_arm(const std::vector<beamformer::SourceEstimate>& ests,
                           const beamformer::LeadField& lf, const simkit::DipoleScene& scene) {
    ordered_json out;
    if (ests.empty() || scene.sources.empty()) return out;
    std::size_t top = beamformer::rank_sources(ests)[0];
    const Vec3& pos = lf.points[top];
    double best = std::numeric_limits<double>::infinity();
    bool hit = false;
    for (const auto& src : scene.sources) {
        double d = simkit::localization_error(pos, src.position);
        best = std::min(best, d);
        hit = hit || d <= 1e-9;
    }
    out["top_point_index"] = top;
    out["top_point"] = {pos[0], pos[1], pos[2]};
    out["localization_error_m"] = best;
    out["grid_hit"] = hit;
    return out;
}

} // namespace

LocalizeResult run_localize(const covstream::EegWindow& y, const beamformer::LeadField& lf,
                            const LocalizeParams& p, const simkit::DipoleScene* truth) {
    if (y.channels == 0 || y.samples == 0)
        throw ParameterError("localize: empty stream");
    if (lf.electrodes != y.channels)
        throw ParameterError("localize: stream has " + std::to_string(y.channels) +
                             " channels but lead field expects " +
                             std::to_string(lf.electrodes));

    const std::size_t k = y.channels;
    std::size_t ns = p.ns != 0 ? p.ns : std::min<std::size_t>(4 * k, y.samples);
    if (ns < k)
        throw ParameterError("localize: window of " + std::to_string(ns) +
                             " samples violates the full-rank requirement ns >= k = " +
                             std::to_string(k));
    if (ns > y.samples)
        throw ParameterError("localize: window exceeds the stream length");
    if (p.cy < 1 || 2 * p.cy >= ns)
        throw ParameterError("localize: block size must satisfy 1 <= cy < ns/2");
    if (!std::isfinite(p.ridge) || p.ridge < 0 || !std::isfinite(p.ridge_rel) ||
        p.ridge_rel < 0)
        throw ParameterError("localize: ridge values must be finite and >= 0");

    // One-time pre-centering: channel means of the initial window.
    covstream::EegWindow yc = y;
    for (std::size_t c = 0; c < k; ++c) {
        double mean = 0;
        const double* row = yc.row(c);
        for (std::size_t t = 0; t < ns; ++t) mean += row[t];
        mean /= static_cast<double>(ns);
        double* wrow = yc.row(c);
        for (std::size_t t = 0; t < yc.samples; ++t) wrow[t] -= mean;
    }

    double ridge = p.ridge;
    if (p.ridge_rel > 0) {
        double tr = 0;
        for (std::size_t c = 0; c < k; ++c)
            for (std::size_t t = 0; t < ns; ++t) tr += yc.at(c, t) * yc.at(c, t);
        tr /= static_cast<double>(ns - 1);
        ridge += p.ridge_rel * tr / static_cast<double>(k);
    }

    const std::size_t slides = (y.samples - ns) / p.cy;
    const std::size_t ignored = (y.samples - ns) - slides * p.cy;

    LocalizeResult res;
    res.report = ordered_json{
        {"command", "localize"},
        {"config",
         {{"k", k},
          {"samples", y.samples},
          {"ns", ns},
          {"cy", p.cy},
          {"ridge", p.ridge},
          {"ridge_rel", p.ridge_rel},
          {"ridge_effective", ridge},
          {"refresh", p.refresh},
          {"mode", p.mode == Mode::both
                       ? "both"
                       : mode_name(p.mode == Mode::accelerated
                                       ? beamformer::ScanMode::accelerated
                                       : beamformer::ScanMode::traditional)},
          {"slides", slides},
          {"samples_ignored", ignored},
          {"grid_points", lf.points.size()},
          {"kernel_isa", kern::isa_name(kern::active())}}}};

    ordered_json modes;
    if (p.mode != Mode::traditional) {
        ArmResult a = run_arm(yc, lf, beamformer::ScanMode::accelerated, ns, p.cy, ridge,
                              p.refresh, slides);
        modes["accelerated"] = std::move(a.json);
        res.accelerated = std::move(a.estimates);
    }
    if (p.mode != Mode::accelerated) {
        ArmResult t = run_arm(yc, lf, beamformer::ScanMode::traditional, ns, p.cy, ridge,
                              p.refresh, slides);
        modes["traditional"] = std::move(t.json);
        res.traditional = std::move(t.estimates);
    }
    res.report["modes"] = std::move(modes);

    if (p.mode == Mode::both && !res.accelerated.empty()) {
        // Compare only points healthy in both arms.
        std::vector<std::size_t> common;
        for (std::size_t i = 0; i < res.accelerated.size(); ++i)
            if (!res.accelerated[i].degenerate && !res.traditional[i].degenerate)
                common.push_back(i);

        double ori_sum = 0, ori_max = 0;
        const std::size_t n = yc.samples;
        Mat sa(common.size(), n), sl(common.size(), n);
        for (std::size_t r = 0; r < common.size(); ++r) {
            std::size_t i = common[r];
            double e = simkit::orientation_error(res.accelerated[i].orientation,
                                                 res.traditional[i].orientation);
            ori_sum += e;
            ori_max = std::max(ori_max, e);
            for (std::size_t t = 0; t < n; ++t) {
                sa(r, t) = res.accelerated[i].series[t];
                sl(r, t) = res.traditional[i].series[t];
            }
        }
        ordered_json cmp;
        cmp["points_compared"] = common.size();
        cmp["orientation_error_mean"] =
            common.empty() ? 0.0 : ori_sum / static_cast<double>(common.size());
        cmp["orientation_error_max"] = ori_max;

        // Reconstruction agreement is scored at the identified source: off-source
        // points legitimately differ between the scalar and vector formulations.
        std::size_t top_a = beamformer::rank_sources(res.accelerated)[0];
        std::size_t top_t = beamformer::rank_sources(res.traditional)[0];
        cmp["top_point"] = top_a;
        cmp["ranking_top_match"] = top_a == top_t;
        if (!res.accelerated[top_a].degenerate && !res.traditional[top_a].degenerate) {
            Mat ta(1, n), tl(1, n);
            for (std::size_t t = 0; t < n; ++t) {
                ta(0, t) = res.accelerated[top_a].series[t];
                tl(0, t) = res.traditional[top_a].series[t];
            }
            cmp["recon_error"] = simkit::recon_error(ta, tl);
        } else {
            cmp["recon_error"] = nullptr;
        }
        cmp["recon_error_grid"] = common.empty() ? 0.0 : simkit::recon_error(sa, sl);
        res.report["comparison"] = std::move(cmp);
    }

    if (truth) {
        ordered_json t;
        ordered_json srcs = ordered_json::array();
        for (const auto& s : truth->sources)
            srcs.push_back({s.position[0], s.position[1], s.position[2]});
        t["sources"] = std::move(srcs);
        if (!res.accelerated.empty())
            t["accelerated"] = truth_for_arm(res.accelerated, lf, *truth);
        if (!res.traditional.empty())
            t["traditional"] = truth_for_arm(res.traditional, lf, *truth);
        res.report["truth"] = std::move(t);
    }

    return res;
}

nlohmann::ordered_json run_bench(const BenchParams& p) {
    const std::size_t k = p.k;
    const std::size_t ns = p.ns != 0 ? p.ns : 4 * k;
    if (k < 4) throw ParameterError("bench: k must be >= 4");
    if (ns < k) throw ParameterError("bench: ns must be >= k (full-rank requirement)");
    if (p.cy < 1 || 2 * p.cy >= ns)
        throw ParameterError("bench: block size must satisfy 1 <= cy < ns/2");
    if (p.grid_points < 1) throw ParameterError("bench: need at least one grid point");

    // Random full-rank setup; geometry is irrelevant for cost accounting.
    simkit::GaussianRng rng(p.seed);
    covstream::EegWindow stream(k, ns + p.slides * p.cy);
    for (double& v : stream.data) v = rng.next();

    beamformer::LeadField lf = simkit::make_leadfield(
        simkit::sphere_points(k, 0.1), simkit::sphere_points(p.grid_points, 0.05),
        simkit::LeadfieldModel::random_fullrank, p.seed ^ 0x9e3779b97f4a7c15ull);

    ordered_json report{{"command", "bench"},
                        {"config",
                         {{"k", k},
                          {"ns", ns},
                          {"cy", p.cy},
                          {"grid_points", p.grid_points},
                          {"slides", p.slides},
                          {"seed", p.seed},
                          {"kernel_isa", kern::isa_name(kern::active())}}}};

    // Refresh disabled so every slide pays the same recursive cost.
    flops::Section sect;
    auto t0 = Clock::now();
    covstream::CovarianceState state =
        covstream::init_state(slice_window(stream, 0, ns), p.cy, 0.0, 0);
    report["init"] = ordered_json{{"macs", sect.elapsed()}, {"wall_ms", ms_since(t0)}};

    if (p.slides > 0) {
        std::uint64_t rec_macs = 0, batch_macs = 0;
        double rec_ms = 0, batch_ms = 0;
        for (std::size_t m = 0; m < p.slides; ++m) {
            Mat block = block_from(stream, ns + m * p.cy, p.cy);

            sect.restart();
            t0 = Clock::now();
            covstream::SlideDelta delta = covstream::slide(state, block);
            millerinv::recursive_inverse_slide(state, delta);
            rec_macs += sect.elapsed();
            rec_ms += ms_since(t0);

            // Full-recompute baseline over the same window (column order in
            // the ring does not affect the scatter).
            covstream::EegWindow win(k, ns);
            for (std::size_t c = 0; c < k; ++c)
                for (std::size_t t = 0; t < ns; ++t) win.at(c, t) = state.window(c, t);
            sect.restart();
            t0 = Clock::now();
            Mat c = covstream::batch_covariance(win, false);
            Mat cinv = millerinv::direct_inverse(c);
            batch_macs += sect.elapsed();
            batch_ms += ms_since(t0);
            (void)cinv;
        }
        double slides_d = static_cast<double>(p.slides);
        report["covariance_inverse"] =
            ordered_json{{"slides", p.slides},
                         {"recursive_macs_total", rec_macs},
                         {"batch_macs_total", batch_macs},
                         {"recursive_macs_per_slide", static_cast<double>(rec_macs) / slides_d},
                         {"batch_macs_per_slide", static_cast<double>(batch_macs) / slides_d},
                         {"ratio", static_cast<double>(rec_macs) / static_cast<double>(batch_macs)},
                         {"miller_fallbacks", state.miller_fallbacks},
                         {"recursive_wall_ms", rec_ms},
                         {"batch_wall_ms", batch_ms}};
    }

    // Reconstruction cost study over the final window with both scan modes.
    covstream::EegWindow finalwin =
        slice_window(stream, p.slides * p.cy, ns);
    beamformer::ScanStats sa, st;
    auto ta = Clock::now();
    beamformer::scan_grid(lf, state.inverse, finalwin, beamformer::ScanMode::accelerated, &sa);
    double ms_a = ms_since(ta);
    auto tt = Clock::now();
    beamformer::scan_grid(lf, state.inverse, finalwin, beamformer::ScanMode::traditional, &st);
    double ms_t = ms_since(tt);

    report["reconstruction"] = ordered_json{
        {"points", p.grid_points},
        {"samples", ns},
        {"scalar_macs", sa.reconstruct_macs},
        {"vector_macs", st.reconstruct_macs},
        {"ratio", static_cast<double>(sa.reconstruct_macs) /
                      static_cast<double>(st.reconstruct_macs)},
        {"collapse_macs", st.collapse_macs},
        {"accelerated_scan_wall_ms", ms_a},
        {"traditional_scan_wall_ms", ms_t}};
    report["orientation"] = ordered_json{{"closed_macs", sa.orientation_macs},
                                         {"jacobi_macs", st.orientation_macs}};
    return report;
}

void strip_timing(nlohmann::ordered_json& j) {
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end();) {
            if (it.key().size() >= 3 && it.key().ends_with("_ms")) {
                it = j.erase(it);
            } else {
                strip_timing(it.value());
                ++it;
            }
        }
    } else if (j.is_array()) {
        for (auto& el : j) strip_timing(el);
    }
}

} // namespace eegbeam::pipeline
