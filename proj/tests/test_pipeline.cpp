#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <string>

#include <json.hpp>

#include "eegbeam/errors.hpp"
#include "eegbeam/pipeline.hpp"
#include "eegbeam/simkit.hpp"

using namespace eegbeam;
using nlohmann::ordered_json;

namespace {

struct SceneSetup {
    simkit::DipoleScene scene;
    beamformer::LeadField lf;
    covstream::EegWindow y;
};

SceneSetup single_dipole_scene() {
    SceneSetup s;
    s.scene.electrodes = simkit::sphere_points(16, 0.1);
    s.scene.grid = simkit::cube_grid(3, 3, 3, {-0.015, -0.015, -0.015}, 0.015);
    s.scene.samples = 256;
    s.scene.sample_rate = 256.0;
    s.scene.seed = 7;

    simkit::DipoleSource src;
    src.position = s.scene.grid[13]; // box center
    src.orientation = normalized3({0.3, -0.5, 0.8});
    src.waveform.amplitude = 1e-7;
    src.waveform.freq = 11.0;
    src.waveform.phase = 0.2;
    s.scene.sources.push_back(src);

    s.lf = simkit::make_leadfield(s.scene.electrodes, s.scene.grid, s.scene.model);
    s.y = simkit::simulate_eeg(s.lf, s.scene);
    return s;
}

pipeline::LocalizeParams default_params() {
    pipeline::LocalizeParams p;
    p.ridge_rel = 1e-8;
    return p;
}

bool has_timing_keys(const ordered_json& j) {
    if (j.is_object()) {
        for (const auto& [key, value] : j.items()) {
            if (key.ends_with("_ms")) return true;
            if (has_timing_keys(value)) return true;
        }
    } else if (j.is_array()) {
        for (const auto& el : j)
            if (has_timing_keys(el)) return true;
    }
    return false;
}

} // namespace

TEST_CASE("run_localize: noise-free dipole lands on the true point in both modes") {
    SceneSetup s = single_dipole_scene();
    auto res = pipeline::run_localize(s.y, s.lf, default_params(), &s.scene);
    const ordered_json& rep = res.report;

    CHECK(rep.at("config").at("k") == 16);
    CHECK(rep.at("config").at("ns") == 64); // min(4k, stream)
    CHECK(rep.at("config").at("slides") == 192);
    CHECK(!rep.at("config").at("kernel_isa").get<std::string>().empty());

    for (const char* mode : {"accelerated", "traditional"}) {
        const ordered_json& arm = rep.at("modes").at(mode);
        CHECK(arm.at("points").size() == 27);
        CHECK(arm.at("degenerate_points") == 0);
        const ordered_json& t = rep.at("truth").at(mode);
        CHECK(t.at("grid_hit") == true);
        CHECK(t.at("localization_error_m") == 0.0);
        CHECK(t.at("top_point_index") == 13);
    }
    CHECK(rep.at("modes").at("accelerated").at("counters").at("slides") == 192);
    CHECK(rep.at("modes").at("accelerated").at("counters").at("miller_fallbacks") == 0);

    const ordered_json& cmp = rep.at("comparison");
    CHECK(cmp.at("points_compared") == 27);
    CHECK(cmp.at("ranking_top_match") == true);
    CHECK(cmp.at("top_point") == 13);
    CHECK(cmp.at("orientation_error_max").get<double>() < 1e-3);
    REQUIRE(cmp.at("recon_error").is_number());
    CHECK(cmp.at("recon_error").get<double>() >= 0.0);
    CHECK(cmp.at("recon_error").get<double>() <= 1.0);
    CHECK(cmp.at("recon_error_grid").get<double>() <= 1.0);
}

TEST_CASE("run_localize: three-source scene runs end to end") {
    SceneSetup s = single_dipole_scene();
    simkit::DipoleSource b;
    b.position = s.scene.grid[0];
    b.orientation = normalized3({1.0, 1.0, 0.0});
    b.waveform.kind = simkit::Waveform::Kind::burst;
    b.waveform.amplitude = 5e-8;
    b.waveform.freq = 7.0;
    b.waveform.center = 128.0;
    b.waveform.width = 12.0;
    simkit::DipoleSource c;
    c.position = s.scene.grid[26];
    c.orientation = normalized3({0.0, -1.0, 0.5});
    c.waveform.amplitude = 3e-8;
    c.waveform.freq = 23.0;
    s.scene.sources.push_back(b);
    s.scene.sources.push_back(c);
    s.y = simkit::simulate_eeg(s.lf, s.scene);

    auto res = pipeline::run_localize(s.y, s.lf, default_params(), &s.scene);
    const ordered_json& rep = res.report;
    CHECK(rep.at("modes").at("accelerated").at("points").size() == 27);
    CHECK(rep.at("truth").at("sources").size() == 3);
    // The strongest source dominates the top rank and sits on the grid.
    CHECK(rep.at("truth").at("accelerated").at("grid_hit") == true);
    for (const auto& pt : rep.at("modes").at("accelerated").at("points"))
        CHECK(std::isfinite(pt.at("activity").get<double>()));
}

TEST_CASE("run_localize: report round-trips losslessly") {
    SceneSetup s = single_dipole_scene();
    auto res = pipeline::run_localize(s.y, s.lf, default_params(), &s.scene);
    std::string text = res.report.dump();
    ordered_json back = ordered_json::parse(text);
    CHECK(back == res.report);
    CHECK(back.dump() == text);
}

TEST_CASE("run_localize: deterministic modulo timing") {
    SceneSetup s = single_dipole_scene();
    auto r1 = pipeline::run_localize(s.y, s.lf, default_params(), &s.scene);
    auto r2 = pipeline::run_localize(s.y, s.lf, default_params(), &s.scene);
    REQUIRE(has_timing_keys(r1.report));
    pipeline::strip_timing(r1.report);
    pipeline::strip_timing(r2.report);
    CHECK(!has_timing_keys(r1.report));
    CHECK(r1.report.dump() == r2.report.dump());
}

TEST_CASE("strip_timing: removes exactly the _ms keys") {
    ordered_json j{{"a_ms", 1},
                   {"b", {{"c_ms", 2}, {"d", 3}}},
                   {"arr", ordered_json::array({ordered_json{{"e_ms", 4}, {"f", 5}}})}};
    pipeline::strip_timing(j);
    ordered_json want{{"b", {{"d", 3}}},
                      {"arr", ordered_json::array({ordered_json{{"f", 5}}})}};
    CHECK(j == want);
}

TEST_CASE("run_localize: parameter rejections") {
    SceneSetup s = single_dipole_scene();
    pipeline::LocalizeParams p = default_params();

    p.ns = 8; // below the channel count
    try {
        pipeline::run_localize(s.y, s.lf, p);
        FAIL("expected ParameterError");
    } catch (const ParameterError& e) {
        CHECK(std::string(e.what()).find("full-rank") != std::string::npos);
    }

    p.ns = s.y.samples + 1;
    CHECK_THROWS_AS(pipeline::run_localize(s.y, s.lf, p), ParameterError);

    p.ns = 64;
    p.cy = 32; // 2*cy >= ns
    CHECK_THROWS_AS(pipeline::run_localize(s.y, s.lf, p), ParameterError);

    p = default_params();
    p.ridge = -1.0;
    CHECK_THROWS_AS(pipeline::run_localize(s.y, s.lf, p), ParameterError);

    covstream::EegWindow wrong(8, 256);
    CHECK_THROWS_AS(pipeline::run_localize(wrong, s.lf, default_params()), ParameterError);
    covstream::EegWindow empty;
    CHECK_THROWS_AS(pipeline::run_localize(empty, s.lf, default_params()), ParameterError);
}

TEST_CASE("run_localize: single-mode runs produce one arm and no comparison") {
    SceneSetup s = single_dipole_scene();
    pipeline::LocalizeParams p = default_params();
    p.mode = pipeline::Mode::accelerated;
    auto res = pipeline::run_localize(s.y, s.lf, p, &s.scene);
    CHECK(res.report.at("modes").size() == 1);
    CHECK(res.report.at("modes").contains("accelerated"));
    CHECK(!res.report.contains("comparison"));
    CHECK(res.traditional.empty());
    CHECK(res.report.at("truth").at("accelerated").at("grid_hit") == true);

    p.mode = pipeline::Mode::traditional;
    auto rest = pipeline::run_localize(s.y, s.lf, p, &s.scene);
    CHECK(rest.report.at("modes").size() == 1);
    CHECK(rest.report.at("modes").contains("traditional"));
    CHECK(rest.accelerated.empty());
}

TEST_CASE("run_bench: reconstruction cost ratio is exactly one third") {
    pipeline::BenchParams p;
    p.k = 32;
    p.cy = 1;
    p.grid_points = 8;
    p.slides = 20;
    ordered_json rep = pipeline::run_bench(p);

    const ordered_json& rec = rep.at("reconstruction");
    std::uint64_t scalar = rec.at("scalar_macs").get<std::uint64_t>();
    std::uint64_t vec = rec.at("vector_macs").get<std::uint64_t>();
    CHECK(scalar > 0);
    CHECK(scalar * 3 == vec);
    CHECK(rec.at("ratio").get<double>() == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("run_bench: recursive update beats batch recompute at k=32") {
    pipeline::BenchParams p;
    p.k = 32;
    p.cy = 1;
    p.grid_points = 4;
    p.slides = 24;
    ordered_json rep = pipeline::run_bench(p);
    const ordered_json& ci = rep.at("covariance_inverse");
    CHECK(ci.at("slides") == 24);
    CHECK(ci.at("miller_fallbacks") == 0);
    CHECK(ci.at("ratio").get<double>() <= 0.35);
}

TEST_CASE("run_bench: slides=0 reports init cost only") {
    pipeline::BenchParams p;
    p.k = 8;
    p.grid_points = 4;
    p.slides = 0;
    ordered_json rep = pipeline::run_bench(p);
    CHECK(!rep.contains("covariance_inverse"));
    CHECK(rep.at("init").at("macs").get<std::uint64_t>() > 0);
    CHECK(rep.contains("reconstruction"));
}

TEST_CASE("run_bench: deterministic modulo timing") {
    pipeline::BenchParams p;
    p.k = 8;
    p.grid_points = 4;
    p.slides = 10;
    p.seed = 5;
    ordered_json r1 = pipeline::run_bench(p);
    ordered_json r2 = pipeline::run_bench(p);
    pipeline::strip_timing(r1);
    pipeline::strip_timing(r2);
    CHECK(r1.dump() == r2.dump());

    p.seed = 6;
    ordered_json r3 = pipeline::run_bench(p);
    pipeline::strip_timing(r3);
    // Costs are input-independent for fixed shapes; only config echo differs.
    CHECK(r3.at("config").at("seed") == 6);
}

TEST_CASE("run_bench: parameter rejections") {
    pipeline::BenchParams p;
    p.k = 3;
    CHECK_THROWS_AS(pipeline::run_bench(p), ParameterError);
    p.k = 8;
    p.ns = 4;
    CHECK_THROWS_AS(pipeline::run_bench(p), ParameterError);
    p.ns = 32;
    p.cy = 16;
    CHECK_THROWS_AS(pipeline::run_bench(p), ParameterError);
    p.cy = 1;
    p.grid_points = 0;
    CHECK_THROWS_AS(pipeline::run_bench(p), ParameterError);
}
