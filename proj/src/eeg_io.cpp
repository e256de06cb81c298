#include "eegbeam/eeg_io.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "eegbeam/errors.hpp"

namespace eegbeam::io {

namespace {

using Bytes = std::vector<unsigned char>;
using nlohmann::json;

constexpr unsigned char kEegbMagic[5] = {0x45, 0x45, 0x47, 0x42, 0x01};
constexpr unsigned char kLfb1Magic[4] = {0x4C, 0x46, 0x42, 0x31};

void put_u32(Bytes& b, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_u64(Bytes& b, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) b.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_f64(Bytes& b, double v) { put_u64(b, std::bit_cast<std::uint64_t>(v)); }

class Reader {
public:
    Reader(const std::string& path, Bytes data) : path_(path), data_(std::move(data)) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }

    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return v;
    }

    double f64() { return std::bit_cast<double>(u64()); }

    void expect_magic(const unsigned char* magic, std::size_t len, const char* what) {
        need(len);
        for (std::size_t i = 0; i < len; ++i)
            if (data_[pos_ + i] != magic[i])
                throw DataError(path_ + ": bad " + what + " magic");
        pos_ += len;
    }

    bool at_end() const { return pos_ == data_.size(); }

private:
    void need(std::size_t n) {
        if (pos_ + n > data_.size()) throw DataError(path_ + ": truncated file");
    }

    std::string path_;
    Bytes data_;
    std::size_t pos_ = 0;
};

Bytes read_all(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(path + ": cannot open");
    Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw DataError(path + ": read failure");
    return data;
}

void write_all(const std::string& path, const Bytes& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError(path + ": cannot open for writing");
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
    if (!out) throw DataError(path + ": write failure");
}

double parse_csv_number(const std::string& tok, const std::string& path, std::size_t line) {
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    while (first < last && (*first == ' ' || *first == '\t')) ++first;
    while (last > first && (last[-1] == ' ' || last[-1] == '\t' || last[-1] == '\r')) --last;
    double v = 0;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        throw DataError(path + ": line " + std::to_string(line) + ": bad number '" + tok + "'");
    return v;
}

Vec3 vec3_from_json(const json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 3)
        throw DataError(what + " must be a 3-element array");
    Vec3 v;
    for (std::size_t i = 0; i < 3; ++i) {
        if (!j[i].is_number()) throw DataError(what + " must hold numbers");
        v[i] = j[i].get<double>();
    }
    return v;
}

std::vector<Vec3> positions_from_json(const json& j, const std::string& what) {
    std::vector<Vec3> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(vec3_from_json(j[i], what + "[" + std::to_string(i) + "]"));
    return out;
}

simkit::Waveform waveform_from_json(const json& j, const std::filesystem::path& scene_dir) {
    if (!j.is_object() || !j.contains("kind"))
        throw DataError("waveform must be an object with a 'kind'");
    simkit::Waveform w;
    std::string kind = j.at("kind").get<std::string>();
    w.amplitude = j.value("amplitude", 1.0);
    w.phase = j.value("phase", 0.0);
    if (kind == "sine") {
        w.kind = simkit::Waveform::Kind::sine;
        w.freq = j.value("freq", 10.0);
    } else if (kind == "burst") {
        w.kind = simkit::Waveform::Kind::burst;
        w.freq = j.value("freq", 10.0);
        w.center = j.value("center", 0.0);
        w.width = j.value("width", 1.0);
    } else if (kind == "file") {
        w.kind = simkit::Waveform::Kind::file;
        if (!j.contains("path")) throw DataError("file waveform needs a 'path'");
        std::filesystem::path p = j.at("path").get<std::string>();
        if (p.is_relative()) p = scene_dir / p;
        std::ifstream in(p);
        if (!in) throw DataError(p.string() + ": cannot open waveform file");
        double v;
        while (in >> v) w.samples.push_back(v);
        if (!in.eof()) throw DataError(p.string() + ": bad waveform data");
    } else {
        throw DataError("unknown waveform kind '" + kind + "'");
    }
    return w;
}

} // namespace

void write_eegb(const std::string& path, const covstream::EegWindow& w) {
    if (w.channels == 0 || w.samples == 0)
        throw ParameterError("write_eegb: empty window");
    Bytes b;
    b.reserve(5 + 4 + 8 + 8 + w.data.size() * 8);
    b.insert(b.end(), kEegbMagic, kEegbMagic + 5);
    put_u32(b, static_cast<std::uint32_t>(w.channels));
    put_u64(b, w.samples);
    put_f64(b, w.sample_rate);
    for (double v : w.data) put_f64(b, v);
    write_all(path, b);
}

covstream::EegWindow read_eegb(const std::string& path) {
    Reader r(path, read_all(path));
    r.expect_magic(kEegbMagic, 5, "EEGB");
    std::uint32_t k = r.u32();
    std::uint64_t n = r.u64();
    double rate = r.f64();
    if (k == 0 || n == 0) throw DataError(path + ": empty EEGB stream");
    if (n > (1ull << 32)) throw DataError(path + ": implausible sample count");
    covstream::EegWindow w(k, static_cast<std::size_t>(n));
    w.sample_rate = rate;
    for (double& v : w.data) v = r.f64();
    if (!r.at_end()) throw DataError(path + ": trailing bytes after EEGB payload");
    if (!w.finite()) throw DataError(path + ": non-finite samples");
    return w;
}

covstream::EegWindow read_eeg_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError(path + ": cannot open");
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos || line[start] == '#') continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ','))
            row.push_back(parse_csv_number(tok, path, lineno));
        if (!rows.empty() && row.size() != rows.front().size())
            throw DataError(path + ": line " + std::to_string(lineno) +
                            ": ragged row (expected " + std::to_string(rows.front().size()) +
                            " values)");
        rows.push_back(std::move(row));
    }
    if (rows.empty() || rows.front().empty()) throw DataError(path + ": no data rows");
    covstream::EegWindow w(rows.size(), rows.front().size());
    for (std::size_t c = 0; c < rows.size(); ++c)
        for (std::size_t t = 0; t < w.samples; ++t) w.at(c, t) = rows[c][t];
    if (!w.finite()) throw DataError(path + ": non-finite samples");
    return w;
}

covstream::EegWindow read_eeg_auto(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(path + ": cannot open");
    unsigned char head[5] = {0};
    in.read(reinterpret_cast<char*>(head), 5);
    bool is_eegb = in.gcount() == 5 && std::equal(head, head + 5, kEegbMagic);
    in.close();
    return is_eegb ? read_eegb(path) : read_eeg_csv(path);
}

void write_lfb1(const std::string& path, const beamformer::LeadField& lf) {
    if (lf.electrodes == 0 || lf.points.empty())
        throw ParameterError("write_lfb1: empty lead field");
    if (lf.points.size() != lf.gains.size())
        throw ParameterError("write_lfb1: malformed lead field");
    Bytes b;
    b.reserve(4 + 8 + lf.points.size() * (3 + lf.electrodes * 3) * 8);
    b.insert(b.end(), kLfb1Magic, kLfb1Magic + 4);
    put_u32(b, static_cast<std::uint32_t>(lf.electrodes));
    put_u32(b, static_cast<std::uint32_t>(lf.points.size()));
    for (std::size_t p = 0; p < lf.points.size(); ++p) {
        for (double v : lf.points[p]) put_f64(b, v);
        const Mat& g = lf.gains[p];
        if (g.rows() != lf.electrodes || g.cols() != 3)
            throw ParameterError("write_lfb1: gain matrix shape mismatch");
        for (std::size_t i = 0; i < g.size(); ++i) put_f64(b, g.data()[i]);
    }
    write_all(path, b);
}

beamformer::LeadField read_lfb1(const std::string& path) {
    Reader r(path, read_all(path));
    r.expect_magic(kLfb1Magic, 4, "LFB1");
    std::uint32_t k = r.u32();
    std::uint32_t np = r.u32();
    if (k == 0 || np == 0) throw DataError(path + ": empty lead field");
    beamformer::LeadField lf;
    lf.electrodes = k;
    lf.points.reserve(np);
    lf.gains.reserve(np);
    for (std::uint32_t p = 0; p < np; ++p) {
        Vec3 pos;
        for (double& v : pos) v = r.f64();
        lf.points.push_back(pos);
        Mat g(k, 3);
        for (std::size_t i = 0; i < g.size(); ++i) g.data()[i] = r.f64();
        if (!g.finite()) throw DataError(path + ": non-finite gains");
        lf.gains.push_back(std::move(g));
    }
    if (!r.at_end()) throw DataError(path + ": trailing bytes after LFB1 payload");
    return lf;
}

simkit::DipoleScene read_scene(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError(path + ": cannot open");
    json j;
    try {
        j = json::parse(in, nullptr, true, true); // allow comments
    } catch (const json::parse_error& e) {
        throw DataError(path + ": " + e.what());
    }
    if (!j.is_object()) throw DataError(path + ": scene must be a JSON object");

    const std::filesystem::path scene_dir = std::filesystem::path(path).parent_path();
    simkit::DipoleScene s;
    try {
        if (!j.contains("electrodes")) throw DataError("missing 'electrodes'");
        const json& je = j.at("electrodes");
        if (je.is_object() && je.contains("sphere")) {
            const json& sp = je.at("sphere");
            s.electrodes = simkit::sphere_points(sp.at("count").get<std::size_t>(),
                                                 sp.at("radius").get<double>());
        } else if (je.is_array()) {
            s.electrodes = positions_from_json(je, "electrodes");
        } else {
            throw DataError("'electrodes' must be an array or {\"sphere\": ...}");
        }

        if (!j.contains("grid")) throw DataError("missing 'grid'");
        const json& jg = j.at("grid");
        if (jg.is_object() && jg.contains("shape")) {
            const json& sh = jg.at("shape");
            if (!sh.is_array() || sh.size() != 3)
                throw DataError("grid shape must be [nx, ny, nz]");
            Vec3 origin = vec3_from_json(jg.at("origin"), "grid origin");
            s.grid = simkit::cube_grid(sh[0].get<std::size_t>(), sh[1].get<std::size_t>(),
                                       sh[2].get<std::size_t>(), origin,
                                       jg.at("spacing").get<double>());
        } else if (jg.is_array()) {
            s.grid = positions_from_json(jg, "grid");
        } else {
            throw DataError("'grid' must be an array or {\"shape\": ...}");
        }

        for (const json& js : j.value("sources", json::array())) {
            simkit::DipoleSource src;
            src.position = vec3_from_json(js.at("position"), "source position");
            src.orientation = vec3_from_json(js.at("orientation"), "source orientation");
            src.waveform = waveform_from_json(js.at("waveform"), scene_dir);
            s.sources.push_back(std::move(src));
        }

        s.noise_sigma = j.value("noise_sigma", 0.0);
        s.seed = j.value("seed", std::uint64_t{0});
        s.samples = j.value("samples", std::size_t{0});
        s.sample_rate = j.value("sample_rate", 0.0);
        std::string model = j.value("model", std::string("homogeneous-dipole"));
        if (model == "homogeneous-dipole")
            s.model = simkit::LeadfieldModel::homogeneous_dipole;
        else if (model == "random-fullrank")
            s.model = simkit::LeadfieldModel::random_fullrank;
        else
            throw DataError("unknown model '" + model + "'");
    } catch (const json::exception& e) {
        throw DataError(path + ": " + e.what());
    } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
    }

    if (s.samples < 1) throw DataError(path + ": scene needs samples >= 1");
    return s;
}

} // namespace eegbeam::io
