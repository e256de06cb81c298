#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "eegbeam/beamformer.hpp"
#include "eegbeam/covstream.hpp"
#include "eegbeam/mat.hpp"

namespace eegbeam::simkit {

enum class LeadfieldModel { homogeneous_dipole, random_fullrank };

struct Waveform {
    enum class Kind { sine, burst, file };
    Kind kind = Kind::sine;
    double amplitude = 1.0;
    // Cycles per second when the scene has a sample rate, cycles per sample
    // otherwise.
    double freq = 10.0;
    double phase = 0.0;
    double center = 0.0; // burst envelope center, in samples
    double width = 1.0;  // burst envelope sigma, in samples
    std::vector<double> samples; // file kind: preloaded data

    std::vector<double> render(std::size_t n, double sample_rate) const;
};

struct DipoleSource {
    Vec3 position{};
    Vec3 orientation{};
    Waveform waveform;
};

struct DipoleScene {
    std::vector<Vec3> electrodes;
    std::vector<Vec3> grid;
    std::vector<DipoleSource> sources;
    double noise_sigma = 0;
    std::uint64_t seed = 0;
    std::size_t samples = 0;
    double sample_rate = 0;
    LeadfieldModel model = LeadfieldModel::homogeneous_dipole;
};

// Deterministic standard normals: mt19937_64 + Box-Muller (bit-stable across
// standard libraries, unlike std::normal_distribution).
class GaussianRng {
public:
    explicit GaussianRng(std::uint64_t seed) : eng_(seed) {}
    double next();
    double uniform(); // [0, 1)

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0;
};

// homogeneous_dipole: electrode e, point p gets row (e-p)^T / (4*pi*|e-p|^3)
// (unit conductivity, infinite homogeneous medium). random_fullrank: seeded
// standard-normal k x 3, resampled while the rank guard fails.
beamformer::LeadField make_leadfield(const std::vector<Vec3>& electrodes,
                                     const std::vector<Vec3>& grid, LeadfieldModel model,
                                     std::uint64_t seed = 0);

// Y = sum_j L(p_j) eta_j s_j(t) + Gaussian(0, noise_sigma^2), seeded.
covstream::EegWindow simulate_eeg(const beamformer::LeadField& lf, const DipoleScene& scene);

// Sign-blind orientation discrepancy in [0, 1]; 0 on exact agreement.
double orientation_error(const Vec3& est, const Vec3& ref);

// Elementwise sign-blind series discrepancy in [0, 1]; 0 on exact agreement.
double recon_error(const Mat& s_a, const Mat& s_l);

// Euclidean distance in meters.
double localization_error(const Vec3& est, const Vec3& truth);

// Deterministic geometry helpers (Fibonacci sphere; regular box grid).
std::vector<Vec3> sphere_points(std::size_t count, double radius);
std::vector<Vec3> cube_grid(std::size_t nx, std::size_t ny, std::size_t nz, const Vec3& origin,
                            double spacing);

} // namespace eegbeam::simkit
