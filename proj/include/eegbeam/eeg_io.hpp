#pragma once

#include <string>

#include "eegbeam/beamformer.hpp"
#include "eegbeam/covstream.hpp"
#include "eegbeam/simkit.hpp"

namespace eegbeam::io {

// EEGB: magic 45 45 47 42 01, then little-endian u32 channels, u64 samples,
// f64 sample_rate (0 = absent), then channels*samples f64, channel-major.
void write_eegb(const std::string& path, const covstream::EegWindow& w);
covstream::EegWindow read_eegb(const std::string& path);

// CSV import convenience: one row per channel, comma separated; '#' lines
// skipped.
covstream::EegWindow read_eeg_csv(const std::string& path);

// Magic sniff: EEGB binary, otherwise CSV.
covstream::EegWindow read_eeg_auto(const std::string& path);

// LFB1: magic 4C 46 42 31, u32 channels, u32 points, then per point
// 3 f64 position + channels x 3 f64 gains row-major, all little-endian.
void write_lfb1(const std::string& path, const beamformer::LeadField& lf);
beamformer::LeadField read_lfb1(const std::string& path);

// Scene JSON; see README for the schema. Relative file-waveform paths
// resolve against the scene file's directory.
simkit::DipoleScene read_scene(const std::string& path);

} // namespace eegbeam::io
