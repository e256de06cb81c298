#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "eegbeam/eeg_io.hpp"
#include "eegbeam/errors.hpp"
#include "eegbeam/pipeline.hpp"
#include "eegbeam/simkit.hpp"

namespace {

using eegbeam::DataError;
using eegbeam::NumericError;
using eegbeam::ParameterError;

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError(path + ": cannot open for writing");
    out << text;
    if (!out) throw DataError(path + ": write failure");
}

void write_report(const std::string& path, const nlohmann::ordered_json& report) {
    write_text(path, report.dump(2) + "\n");
}

std::string csv_sibling(const std::string& out_path) {
    std::string base = out_path;
    std::size_t dot = base.find_last_of('.');
    std::size_t sep = base.find_last_of('/');
    if (dot != std::string::npos && (sep == std::string::npos || dot > sep))
        base.resize(dot);
    return base + ".csv";
}

void write_points_csv(const std::string& path, const nlohmann::ordered_json& report,
                      const eegbeam::beamformer::LeadField& lf) {
    std::string text = "mode,index,x,y,z,activity,ox,oy,oz,degenerate\n";
    char buf[512];
    for (const auto& [mode, arm] : report.at("modes").items()) {
        for (const auto& pt : arm.at("points")) {
            std::size_t i = pt.at("index").get<std::size_t>();
            const auto& ori = pt.at("orientation");
            std::snprintf(buf, sizeof buf, "%s,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n",
                          mode.c_str(), i, lf.points[i][0], lf.points[i][1], lf.points[i][2],
                          pt.at("activity").get<double>(), ori[0].get<double>(),
                          ori[1].get<double>(), ori[2].get<double>(),
                          pt.at("degenerate").get<bool>() ? 1 : 0);
            text += buf;
        }
    }
    write_text(path, text);
}

int run(int argc, char** argv) {
    CLI::App app{"eegbeam: streaming LCMV source localization for multichannel EEG"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Render a scene file to EEG + lead field binaries");
    std::string scene_path, out_prefix;
    sim->add_option("scene", scene_path, "Scene JSON file")->required();
    sim->add_option("out-prefix", out_prefix, "Output path prefix")->required();

    // localize
    auto* loc = app.add_subcommand("localize", "Run source localization over an EEG stream");
    std::string eeg_path, lf_path, loc_mode = "both", out_path = "report.json", truth_path;
    eegbeam::pipeline::LocalizeParams lp;
    bool emit_csv = false;
    loc->add_option("eeg", eeg_path, "EEG stream (EEGB binary or CSV)")->required();
    loc->add_option("leadfield", lf_path, "Lead field (LFB1 binary)")->required();
    loc->add_option("--mode", loc_mode, "accelerated | traditional | both")
        ->check(CLI::IsMember({"accelerated", "traditional", "both"}))
        ->capture_default_str();
    loc->add_option("--ns", lp.ns, "Window length in samples (default 4k)");
    loc->add_option("--cy", lp.cy, "Samples per slide (default 1)")->capture_default_str();
    loc->add_option("--ridge", lp.ridge, "Absolute diagonal loading")->capture_default_str();
    loc->add_option("--ridge-rel", lp.ridge_rel,
                    "Relative diagonal loading, scaled by trace(C)/k");
    loc->add_option("--refresh", lp.refresh,
                    "Slides between direct inverse refreshes (0 disables)")
        ->capture_default_str();
    loc->add_option("--out", out_path, "Report JSON path")->capture_default_str();
    loc->add_flag("--csv", emit_csv, "Also write a per-point CSV next to the report");
    loc->add_option("--truth", truth_path, "Scene JSON for localization-error metrics");

    // bench
    auto* ben = app.add_subcommand("bench", "Deterministic flop-count benchmark");
    eegbeam::pipeline::BenchParams bp;
    std::string bench_out;
    ben->add_option("--k", bp.k, "Channel count")->capture_default_str();
    ben->add_option("--ns", bp.ns, "Window length (default 4k)");
    ben->add_option("--cy", bp.cy, "Samples per slide")->capture_default_str();
    ben->add_option("--grid-points", bp.grid_points, "Grid size")->capture_default_str();
    ben->add_option("--slides", bp.slides, "Slides to run")->capture_default_str();
    ben->add_option("--seed", bp.seed, "RNG seed")->capture_default_str();
    ben->add_option("--out", bench_out, "Report JSON path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    if (sim->parsed()) {
        eegbeam::simkit::DipoleScene scene = eegbeam::io::read_scene(scene_path);
        eegbeam::beamformer::LeadField lf = eegbeam::simkit::make_leadfield(
            scene.electrodes, scene.grid, scene.model, scene.seed);
        eegbeam::covstream::EegWindow y = eegbeam::simkit::simulate_eeg(lf, scene);
        std::string eeg_out = out_prefix + ".eegb";
        std::string lf_out = out_prefix + ".lfb1";
        eegbeam::io::write_eegb(eeg_out, y);
        eegbeam::io::write_lfb1(lf_out, lf);
        std::cout << "wrote " << eeg_out << " (channels=" << y.channels
                  << ", samples=" << y.samples << ") and " << lf_out
                  << " (points=" << lf.points.size() << ")\n";
        return 0;
    }

    if (loc->parsed()) {
        lp.mode = loc_mode == "accelerated"  ? eegbeam::pipeline::Mode::accelerated
                  : loc_mode == "traditional" ? eegbeam::pipeline::Mode::traditional
                                              : eegbeam::pipeline::Mode::both;
        eegbeam::covstream::EegWindow y = eegbeam::io::read_eeg_auto(eeg_path);
        eegbeam::beamformer::LeadField lf = eegbeam::io::read_lfb1(lf_path);
        eegbeam::simkit::DipoleScene truth;
        bool have_truth = !truth_path.empty();
        if (have_truth) truth = eegbeam::io::read_scene(truth_path);

        eegbeam::pipeline::LocalizeResult res =
            eegbeam::pipeline::run_localize(y, lf, lp, have_truth ? &truth : nullptr);
        write_report(out_path, res.report);
        if (emit_csv) write_points_csv(csv_sibling(out_path), res.report, lf);

        std::cout << "wrote " << out_path;
        if (emit_csv) std::cout << " and " << csv_sibling(out_path);
        std::cout << "\n";
        for (const auto& [mode, arm] : res.report.at("modes").items()) {
            const auto& ranking = arm.at("ranking");
            std::cout << "  " << mode << ": " << arm.at("points").size() << " points";
            if (!ranking.empty())
                std::cout << ", top point " << ranking[0].get<std::size_t>();
            std::cout << "\n";
        }
        return 0;
    }

    // bench
    nlohmann::ordered_json report = eegbeam::pipeline::run_bench(bp);
    if (bench_out.empty()) {
        std::cout << report.dump(2) << "\n";
    } else {
        write_report(bench_out, report);
        std::cout << "wrote " << bench_out << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ParameterError& e) {
        std::cerr << "parameter error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
