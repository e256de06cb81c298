#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "eegbeam/beamformer.hpp"
#include "eegbeam/covstream.hpp"
#include "eegbeam/simkit.hpp"

namespace eegbeam::pipeline {

enum class Mode { accelerated, traditional, both };

struct LocalizeParams {
    std::size_t ns = 0;      // 0: default min(4k, stream length)
    std::size_t cy = 1;
    double ridge = 0;        // absolute diagonal loading
    double ridge_rel = 0;    // plus ridge_rel * tr(C_init)/k
    std::uint64_t refresh = 4096;
    Mode mode = Mode::both;
};

// Report plus the in-memory estimates (series are too large to serialize).
struct LocalizeResult {
    nlohmann::ordered_json report;
    std::vector<beamformer::SourceEstimate> accelerated;
    std::vector<beamformer::SourceEstimate> traditional;
};

// Full localization pipeline: pre-center on the initial window, stream the
// covariance and its inverse across the input, scan the grid in the
// requested mode(s), and (mode=both) embed the cross-path comparison.
// `truth` adds localization metrics against a known scene.
LocalizeResult run_localize(const covstream::EegWindow& y, const beamformer::LeadField& lf,
                            const LocalizeParams& p,
                            const simkit::DipoleScene* truth = nullptr);

struct BenchParams {
    std::size_t k = 32;
    std::size_t ns = 0; // 0: 4k
    std::size_t cy = 1;
    std::size_t grid_points = 64;
    std::size_t slides = 100;
    std::uint64_t seed = 1;
};

// Deterministic cost study: recursive covariance+inverse maintenance vs full
// recompute, and scalar vs 3-column reconstruction, as multiply-add counts
// (plus informational wall times).
nlohmann::ordered_json run_bench(const BenchParams& p);

// Timing keys all end in "_ms"; stripping them yields the deterministic
// portion of any report.
void strip_timing(nlohmann::ordered_json& j);

} // namespace eegbeam::pipeline
