#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "eegbeam/eeg_io.hpp"
#include "eegbeam/errors.hpp"
#include "eegbeam/simkit.hpp"

using namespace eegbeam;
namespace fs = std::filesystem;

namespace {

fs::path test_dir() {
    fs::path d = fs::temp_directory_path() / "eegbeam_io_test";
    fs::create_directories(d);
    return d;
}

std::string path_for(const char* name) { return (test_dir() / name).string(); }

std::vector<unsigned char> slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(bool(in));
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const std::string& path, const std::vector<unsigned char>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    REQUIRE(bool(out));
}

void spit_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    out << text;
    REQUIRE(bool(out));
}

covstream::EegWindow sample_window() {
    covstream::EegWindow w(3, 7);
    w.sample_rate = 256.0;
    simkit::GaussianRng g(12);
    for (double& v : w.data) v = g.next();
    return w;
}

beamformer::LeadField sample_leadfield() {
    auto electrodes = simkit::sphere_points(6, 0.1);
    auto grid = simkit::cube_grid(2, 2, 1, {-0.01, -0.01, 0.0}, 0.02);
    return simkit::make_leadfield(electrodes, grid, simkit::LeadfieldModel::homogeneous_dipole);
}

} // namespace

TEST_CASE("EEGB: golden byte layout") {
    covstream::EegWindow w(1, 2);
    w.data = {1.0, -2.5};
    std::string p = path_for("golden.eegb");
    io::write_eegb(p, w);

    const std::vector<unsigned char> want = {
        0x45, 0x45, 0x47, 0x42, 0x01,                   // magic + version
        0x01, 0x00, 0x00, 0x00,                         // channels
        0x02, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, // samples
        0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, // sample_rate 0 = absent
        0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0xF0, 0x3F, // 1.0
        0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x04, 0xC0, // -2.5
    };
    CHECK(slurp(p) == want);
}

TEST_CASE("EEGB: round-trip preserves everything") {
    covstream::EegWindow w = sample_window();
    std::string p = path_for("roundtrip.eegb");
    io::write_eegb(p, w);
    covstream::EegWindow r = io::read_eegb(p);
    CHECK(r.channels == w.channels);
    CHECK(r.samples == w.samples);
    CHECK(r.sample_rate == w.sample_rate);
    CHECK(r.data == w.data);
}

TEST_CASE("EEGB: malformed files are rejected") {
    covstream::EegWindow w = sample_window();
    std::string p = path_for("mangle.eegb");
    io::write_eegb(p, w);
    std::vector<unsigned char> good = slurp(p);

    std::vector<unsigned char> bad = good;
    bad.pop_back();
    spit(p, bad);
    CHECK_THROWS_AS(io::read_eegb(p), DataError);

    bad = good;
    bad[0] = 0x58;
    spit(p, bad);
    CHECK_THROWS_AS(io::read_eegb(p), DataError);

    bad = good;
    bad.push_back(0x00);
    spit(p, bad);
    CHECK_THROWS_AS(io::read_eegb(p), DataError);

    // Zero channels in the header.
    bad = good;
    bad[5] = 0x00;
    spit(p, bad);
    CHECK_THROWS_AS(io::read_eegb(p), DataError);

    CHECK_THROWS_AS(io::read_eegb(path_for("does_not_exist.eegb")), DataError);
    covstream::EegWindow empty;
    CHECK_THROWS_AS(io::write_eegb(path_for("empty.eegb"), empty), ParameterError);
}

TEST_CASE("CSV: rows are channels, comments skipped") {
    std::string p = path_for("stream.csv");
    spit_text(p,
              "# two channels, three samples\n"
              "1.0, 2.0, 3.0\n"
              "\n"
              "  # indented comment\n"
              "-1.5,0.25,1e-3\n");
    covstream::EegWindow w = io::read_eeg_csv(p);
    REQUIRE(w.channels == 2);
    REQUIRE(w.samples == 3);
    CHECK(w.at(0, 0) == 1.0);
    CHECK(w.at(0, 2) == 3.0);
    CHECK(w.at(1, 0) == -1.5);
    CHECK(w.at(1, 2) == 1e-3);
}

TEST_CASE("CSV: ragged and malformed rows are rejected") {
    std::string p = path_for("bad.csv");
    spit_text(p, "1,2,3\n4,5\n");
    CHECK_THROWS_AS(io::read_eeg_csv(p), DataError);
    spit_text(p, "1,2\n3,abc\n");
    CHECK_THROWS_AS(io::read_eeg_csv(p), DataError);
    spit_text(p, "# only comments\n");
    CHECK_THROWS_AS(io::read_eeg_csv(p), DataError);
}

TEST_CASE("read_eeg_auto sniffs the magic") {
    covstream::EegWindow w = sample_window();
    std::string pb = path_for("auto.eegb");
    io::write_eegb(pb, w);
    covstream::EegWindow rb = io::read_eeg_auto(pb);
    CHECK(rb.data == w.data);

    std::string pc = path_for("auto.csv");
    spit_text(pc, "1,2\n3,4\n");
    covstream::EegWindow rc = io::read_eeg_auto(pc);
    CHECK(rc.channels == 2);
    CHECK(rc.at(1, 1) == 4.0);
}

TEST_CASE("LFB1: round-trip preserves points and gains") {
    beamformer::LeadField lf = sample_leadfield();
    std::string p = path_for("roundtrip.lfb1");
    io::write_lfb1(p, lf);
    beamformer::LeadField r = io::read_lfb1(p);
    REQUIRE(r.electrodes == lf.electrodes);
    REQUIRE(r.points.size() == lf.points.size());
    for (std::size_t i = 0; i < lf.points.size(); ++i) {
        CHECK(r.points[i] == lf.points[i]);
        REQUIRE(r.gains[i].size() == lf.gains[i].size());
        for (std::size_t j = 0; j < lf.gains[i].size(); ++j)
            CHECK(r.gains[i].data()[j] == lf.gains[i].data()[j]);
    }
}

TEST_CASE("LFB1: malformed files are rejected") {
    beamformer::LeadField lf = sample_leadfield();
    std::string p = path_for("mangle.lfb1");
    io::write_lfb1(p, lf);
    std::vector<unsigned char> good = slurp(p);

    std::vector<unsigned char> bad = good;
    bad.resize(bad.size() / 2);
    spit(p, bad);
    CHECK_THROWS_AS(io::read_lfb1(p), DataError);

    bad = good;
    bad[3] = 0x32;
    spit(p, bad);
    CHECK_THROWS_AS(io::read_lfb1(p), DataError);

    bad = good;
    bad.insert(bad.end(), {1, 2, 3});
    spit(p, bad);
    CHECK_THROWS_AS(io::read_lfb1(p), DataError);

    beamformer::LeadField empty;
    CHECK_THROWS_AS(io::write_lfb1(path_for("empty.lfb1"), empty), ParameterError);
}

TEST_CASE("scene JSON: explicit positions and a sine source") {
    std::string p = path_for("scene_explicit.json");
    spit_text(p, R"({
        "electrodes": [[0,0,0.1],[0,0.1,0],[0.1,0,0],[0,0,-0.1]],
        "grid": [[0,0,0],[0.01,0,0]],
        "sources": [{
            "position": [0.01,0,0],
            "orientation": [0,0,1],
            "waveform": {"kind":"sine","amplitude":2.5,"freq":11,"phase":0.3}
        }],
        "noise_sigma": 0.25,
        "seed": 42,
        "samples": 64,
        "sample_rate": 128,
        "model": "homogeneous-dipole"
    })");
    simkit::DipoleScene s = io::read_scene(p);
    REQUIRE(s.electrodes.size() == 4);
    CHECK(s.electrodes[1] == Vec3{0.0, 0.1, 0.0});
    REQUIRE(s.grid.size() == 2);
    REQUIRE(s.sources.size() == 1);
    CHECK(s.sources[0].position == Vec3{0.01, 0.0, 0.0});
    CHECK(s.sources[0].waveform.kind == simkit::Waveform::Kind::sine);
    CHECK(s.sources[0].waveform.amplitude == 2.5);
    CHECK(s.sources[0].waveform.freq == 11.0);
    CHECK(s.sources[0].waveform.phase == 0.3);
    CHECK(s.noise_sigma == 0.25);
    CHECK(s.seed == 42);
    CHECK(s.samples == 64);
    CHECK(s.sample_rate == 128.0);
    CHECK(s.model == simkit::LeadfieldModel::homogeneous_dipole);
}

TEST_CASE("scene JSON: generator shorthands expand") {
    std::string p = path_for("scene_short.json");
    spit_text(p, R"({
        // comments are allowed
        "electrodes": {"sphere": {"count": 16, "radius": 0.1}},
        "grid": {"shape": [3,3,3], "origin": [-0.02,-0.02,-0.02], "spacing": 0.02},
        "sources": [{
            "position": [0,0,0],
            "orientation": [1,0,0],
            "waveform": {"kind":"burst","freq":9,"center":32,"width":4}
        }],
        "samples": 64,
        "model": "random-fullrank"
    })");
    simkit::DipoleScene s = io::read_scene(p);
    CHECK(s.electrodes == simkit::sphere_points(16, 0.1));
    CHECK(s.grid == simkit::cube_grid(3, 3, 3, {-0.02, -0.02, -0.02}, 0.02));
    CHECK(s.sources[0].waveform.kind == simkit::Waveform::Kind::burst);
    CHECK(s.sources[0].waveform.center == 32.0);
    CHECK(s.sources[0].waveform.width == 4.0);
    CHECK(s.model == simkit::LeadfieldModel::random_fullrank);
    CHECK(s.noise_sigma == 0.0);
    CHECK(s.seed == 0);
}

TEST_CASE("scene JSON: file waveform resolves next to the scene") {
    spit_text(path_for("wave.txt"), "0.5 -0.5 1.0 0.0\n");
    std::string p = path_for("scene_file.json");
    spit_text(p, R"({
        "electrodes": [[0,0,0.1],[0,0.1,0],[0.1,0,0],[0,0,-0.1]],
        "grid": [[0,0,0]],
        "sources": [{
            "position": [0,0,0],
            "orientation": [0,1,0],
            "waveform": {"kind":"file","path":"wave.txt","amplitude":2}
        }],
        "samples": 4
    })");
    simkit::DipoleScene s = io::read_scene(p);
    REQUIRE(s.sources.size() == 1);
    CHECK(s.sources[0].waveform.kind == simkit::Waveform::Kind::file);
    CHECK(s.sources[0].waveform.samples == std::vector<double>{0.5, -0.5, 1.0, 0.0});
    auto rendered = s.sources[0].waveform.render(4, 0.0);
    CHECK(rendered[2] == 2.0);
}

TEST_CASE("scene JSON: malformed scenes are rejected") {
    std::string p = path_for("scene_bad.json");

    spit_text(p, "{ not json");
    CHECK_THROWS_AS(io::read_scene(p), DataError);

    spit_text(p, R"({"grid": [[0,0,0]], "samples": 4})");
    CHECK_THROWS_AS(io::read_scene(p), DataError); // electrodes missing

    spit_text(p, R"({"electrodes": [[0,0,0.1]], "samples": 4})");
    CHECK_THROWS_AS(io::read_scene(p), DataError); // grid missing

    spit_text(p, R"({
        "electrodes": [[0,0,0.1]], "grid": [[0,0,0]],
        "sources": [{"position":[0,0,0],"orientation":[1,0,0],
                     "waveform":{"kind":"triangle"}}],
        "samples": 4
    })");
    CHECK_THROWS_AS(io::read_scene(p), DataError); // unknown waveform kind

    spit_text(p, R"({
        "electrodes": [[0,0,0.1]], "grid": [[0,0,0]],
        "samples": 4, "model": "bem"
    })");
    CHECK_THROWS_AS(io::read_scene(p), DataError); // unknown model

    spit_text(p, R"({"electrodes": [[0,0,0.1]], "grid": [[0,0,0]]})");
    CHECK_THROWS_AS(io::read_scene(p), DataError); // samples missing

    spit_text(p, R"({
        "electrodes": [[0,0,0.1]], "grid": [[0,0,0]],
        "sources": [{"position":[0,0],"orientation":[1,0,0],
                     "waveform":{"kind":"sine"}}],
        "samples": 4
    })");
    CHECK_THROWS_AS(io::read_scene(p), DataError); // position not 3 numbers

    CHECK_THROWS_AS(io::read_scene(path_for("missing_scene.json")), DataError);
}
