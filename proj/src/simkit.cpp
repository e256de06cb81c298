#include "eegbeam/simkit.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "eegbeam/errors.hpp"
#include "eegbeam/kernels.hpp"

namespace eegbeam::simkit {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool finite3(const Vec3& v) {
    return std::isfinite(v[0]) && std::isfinite(v[1]) && std::isfinite(v[2]);
}

Mat dipole_gains(const std::vector<Vec3>& electrodes, const Vec3& p) {
    Mat g(electrodes.size(), 3);
    for (std::size_t e = 0; e < electrodes.size(); ++e) {
        Vec3 d = sub3(electrodes[e], p);
        double r = norm3(d);
        double c = 1.0 / (4.0 * std::numbers::pi * r * r * r);
        g(e, 0) = d[0] * c;
        g(e, 1) = d[1] * c;
        g(e, 2) = d[2] * c;
    }
    return g;
}

} // namespace

double GaussianRng::uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
}

double GaussianRng::next() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = 1.0 - uniform(); // (0, 1]
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = kTwoPi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
}

std::vector<double> Waveform::render(std::size_t n, double sample_rate) const {
    std::vector<double> out(n, 0.0);
    const double step = sample_rate > 0 ? freq / sample_rate : freq; // cycles per sample
    switch (kind) {
    case Kind::sine:
        for (std::size_t t = 0; t < n; ++t)
            out[t] = amplitude * std::sin(kTwoPi * step * static_cast<double>(t) + phase);
        break;
    case Kind::burst: {
        if (width <= 0) throw ParameterError("waveform: burst width must be positive");
        for (std::size_t t = 0; t < n; ++t) {
            double dt = (static_cast<double>(t) - center) / width;
            out[t] = amplitude * std::sin(kTwoPi * step * static_cast<double>(t) + phase) *
                     std::exp(-0.5 * dt * dt);
        }
        break;
    }
    case Kind::file:
        if (samples.size() < n)
            throw DataError("waveform: file provides " + std::to_string(samples.size()) +
                            " samples, scene needs " + std::to_string(n));
        for (std::size_t t = 0; t < n; ++t) out[t] = amplitude * samples[t];
        break;
    }
    return out;
}

beamformer::LeadField make_leadfield(const std::vector<Vec3>& electrodes,
                                     const std::vector<Vec3>& grid, LeadfieldModel model,
                                     std::uint64_t seed) {
    if (electrodes.size() < 4)
        throw ParameterError("make_leadfield: need at least 4 electrodes");
    for (const Vec3& e : electrodes)
        if (!finite3(e)) throw DataError("make_leadfield: non-finite electrode position");
    for (const Vec3& p : grid)
        if (!finite3(p)) throw DataError("make_leadfield: non-finite grid position");

    beamformer::LeadField lf;
    lf.electrodes = electrodes.size();
    lf.points = grid;
    lf.gains.reserve(grid.size());

    if (model == LeadfieldModel::homogeneous_dipole) {
        for (const Vec3& p : grid) {
            for (const Vec3& e : electrodes)
                if (norm3(sub3(e, p)) < 1e-3)
                    throw DataError("make_leadfield: electrode within 1 mm of a grid point");
            lf.gains.push_back(dipole_gains(electrodes, p));
        }
    } else {
        GaussianRng rng(seed);
        for (std::size_t p = 0; p < grid.size(); ++p) {
            Mat g(lf.electrodes, 3);
            do {
                for (std::size_t i = 0; i < g.size(); ++i) g.data()[i] = rng.next();
            } while (!beamformer::leadfield_full_rank(g));
            lf.gains.push_back(std::move(g));
        }
    }
    return lf;
}

covstream::EegWindow simulate_eeg(const beamformer::LeadField& lf, const DipoleScene& scene) {
    if (scene.samples < 1) throw ParameterError("simulate_eeg: scene needs samples >= 1");
    if (!std::isfinite(scene.noise_sigma) || scene.noise_sigma < 0)
        throw ParameterError("simulate_eeg: noise_sigma must be finite and >= 0");

    const std::size_t k = lf.electrodes;
    const std::size_t n = scene.samples;
    covstream::EegWindow y(k, n);
    y.sample_rate = scene.sample_rate;

    for (const DipoleSource& src : scene.sources) {
        if (!finite3(src.position) || !finite3(src.orientation))
            throw DataError("simulate_eeg: non-finite source fields");

        std::size_t idx = lf.points.size();
        for (std::size_t p = 0; p < lf.points.size(); ++p) {
            if (norm3(sub3(lf.points[p], src.position)) <= 1e-9) {
                idx = p;
                break;
            }
        }
        if (idx == lf.points.size())
            throw DataError("simulate_eeg: source position is not a lead field grid point");

        double onorm = norm3(src.orientation);
        if (onorm < 1e-12) throw DataError("simulate_eeg: zero source orientation");
        Vec3 eta = scaled3(src.orientation, 1.0 / onorm);

        std::vector<double> col = beamformer::scalar_leadfield(lf.gains[idx], eta);
        std::vector<double> s = src.waveform.render(n, scene.sample_rate);
        for (std::size_t c = 0; c < k; ++c) kern::axpy(y.row(c), col[c], s.data(), n);
    }

    if (scene.noise_sigma > 0) {
        GaussianRng rng(scene.seed);
        for (std::size_t c = 0; c < k; ++c) {
            double* row = y.row(c);
            for (std::size_t t = 0; t < n; ++t) row[t] += scene.noise_sigma * rng.next();
        }
    }
    return y;
}

double orientation_error(const Vec3& est, const Vec3& ref) {
    if (!finite3(est) || !finite3(ref))
        throw DataError("orientation_error: non-finite input");
    double sum = 0.0, scale = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
        sum += std::fabs(std::fabs(est[c]) - std::fabs(ref[c]));
        scale = std::max({scale, std::fabs(est[c]), std::fabs(ref[c])});
    }
    if (sum == 0.0 || scale == 0.0) return 0.0;
    return sum / (3.0 * scale);
}

double recon_error(const Mat& s_a, const Mat& s_l) {
    if (s_a.rows() != s_l.rows() || s_a.cols() != s_l.cols())
        throw ParameterError("recon_error: shape mismatch");
    double sum = 0.0, mx = 0.0;
    for (std::size_t i = 0; i < s_a.size(); ++i) {
        double d = std::fabs(std::fabs(s_a.data()[i]) - std::fabs(s_l.data()[i]));
        sum += d;
        mx = std::max(mx, d);
    }
    if (mx == 0.0) return 0.0;
    return sum / (static_cast<double>(s_a.size()) * mx);
}

double localization_error(const Vec3& est, const Vec3& truth) {
    if (!finite3(est) || !finite3(truth))
        throw DataError("localization_error: non-finite input");
    return norm3(sub3(est, truth));
}

std::vector<Vec3> sphere_points(std::size_t count, double radius) {
    if (count == 0) return {};
    std::vector<Vec3> out;
    out.reserve(count);
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (std::size_t i = 0; i < count; ++i) {
        double z = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(count);
        double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        double phi = golden * static_cast<double>(i);
        out.push_back({radius * r * std::cos(phi), radius * r * std::sin(phi), radius * z});
    }
    return out;
}

std::vector<Vec3> cube_grid(std::size_t nx, std::size_t ny, std::size_t nz, const Vec3& origin,
                            double spacing) {
    std::vector<Vec3> out;
    out.reserve(nx * ny * nz);
    for (std::size_t ix = 0; ix < nx; ++ix)
        for (std::size_t iy = 0; iy < ny; ++iy)
            for (std::size_t iz = 0; iz < nz; ++iz)
                out.push_back({origin[0] + spacing * static_cast<double>(ix),
                               origin[1] + spacing * static_cast<double>(iy),
                               origin[2] + spacing * static_cast<double>(iz)});
    return out;
}

} // namespace eegbeam::simkit
