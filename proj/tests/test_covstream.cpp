#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "eegbeam/covstream.hpp"
#include "eegbeam/eig3.hpp"
#include "eegbeam/errors.hpp"
#include "eegbeam/millerinv.hpp"

using namespace eegbeam;
using covstream::EegWindow;

namespace {

EegWindow random_window(std::mt19937_64& eng, std::size_t k, std::size_t n) {
    std::normal_distribution<double> g(0.0, 1.0);
    EegWindow w(k, n);
    for (auto& x : w.data) x = g(eng);
    return w;
}

EegWindow slice(const EegWindow& w, std::size_t start, std::size_t len) {
    EegWindow out(w.channels, len);
    for (std::size_t c = 0; c < w.channels; ++c)
        for (std::size_t t = 0; t < len; ++t) out.at(c, t) = w.at(c, start + t);
    return out;
}

Mat block(const EegWindow& w, std::size_t start, std::size_t cy) {
    Mat b(w.channels, cy);
    for (std::size_t c = 0; c < w.channels; ++c)
        for (std::size_t t = 0; t < cy; ++t) b(c, t) = w.at(c, start + t);
    return b;
}

}  // namespace

TEST_CASE("centered covariance of a 2x2 window") {
    // Rows (1,-1) and (1,-1): means 0, each dot = 2, normalized by n-1 = 1.
    EegWindow w(2, 2);
    w.at(0, 0) = 1;
    w.at(0, 1) = -1;
    w.at(1, 0) = 1;
    w.at(1, 1) = -1;
    Mat c = covstream::batch_covariance(w, true);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) CHECK(c(i, j) == doctest::Approx(2.0));
}

TEST_CASE("constant channels center to zero covariance") {
    EegWindow w(2, 5);
    for (std::size_t t = 0; t < 5; ++t) {
        w.at(0, t) = 3.0;
        w.at(1, t) = -7.0;
    }
    Mat c = covstream::batch_covariance(w, true);
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(c.data()[i] == 0.0);
}

TEST_CASE("uncentered covariance of the identity window") {
    EegWindow w(2, 2);
    w.at(0, 0) = 1;
    w.at(1, 1) = 1;
    Mat c = covstream::batch_covariance(w, false);
    CHECK(c(0, 0) == doctest::Approx(1.0));
    CHECK(c(1, 1) == doctest::Approx(1.0));
    CHECK(c(0, 1) == 0.0);
    CHECK(c(1, 0) == 0.0);
}

TEST_CASE("centering a single sample is rejected") {
    EegWindow w(2, 1);
    CHECK_THROWS_AS(covstream::batch_covariance(w, true), ParameterError);
}

TEST_CASE("non-finite windows are rejected") {
    EegWindow w(2, 3);
    w.at(1, 2) = std::nan("");
    CHECK_THROWS_AS(covstream::batch_covariance(w, false), DataError);
}

TEST_CASE("init_state validates the geometry") {
    std::mt19937_64 eng(0x11ceULL);
    EegWindow w = random_window(eng, 3, 8);
    CHECK_THROWS_AS(covstream::init_state(w, 0, 0.0), ParameterError);
    CHECK_THROWS_AS(covstream::init_state(w, 4, 0.0), ParameterError);  // 2*cy >= ns
    CHECK_THROWS_AS(covstream::init_state(w, 1, -1.0), ParameterError);

    EegWindow tiny = random_window(eng, 4, 3);  // ns < k
    CHECK_THROWS_AS(covstream::init_state(tiny, 1, 0.0), ParameterError);

    EegWindow two = random_window(eng, 2, 2);  // no cy satisfies 2*cy < ns
    CHECK_THROWS_AS(covstream::init_state(two, 1, 0.0), ParameterError);
}

TEST_CASE("init_state inverts the initial covariance") {
    std::mt19937_64 eng(0x1ce5ULL);
    EegWindow w = random_window(eng, 3, 12);
    auto st = covstream::init_state(w, 2, 0.0);
    CHECK(st.inverse_valid);
    CHECK(st.window_start == 0);
    Mat c = covstream::covariance(st);
    CHECK(inverse_residual(c, st.inverse) <= 1e-10 * (1.0 + frobenius_norm(c)));
}

TEST_CASE("rank-deficient window needs a ridge") {
    EegWindow w(2, 6);
    for (std::size_t t = 0; t < 6; ++t) {
        w.at(0, t) = double(t + 1);
        w.at(1, t) = double(t + 1);  // duplicated channel
    }
    CHECK_THROWS_AS(covstream::init_state(w, 1, 0.0), NumericError);
    auto st = covstream::init_state(w, 1, 1e-6);
    CHECK(st.inverse_valid);
}

TEST_CASE("slide arithmetic on a hand-checked window") {
    // Window columns (1,0),(0,1): scatter I. Evict (1,0), add (1,1):
    // scatter becomes [[1,1],[1,2]].
    covstream::CovarianceState st;
    st.k = 2;
    st.ns = 2;
    st.cy = 1;
    st.scatter = Mat::identity(2);
    st.window = Mat(2, 2);
    st.window(0, 0) = 1;
    st.window(1, 1) = 1;

    Mat nb(2, 1);
    nb(0, 0) = 1;
    nb(1, 0) = 1;
    auto delta = covstream::slide(st, nb);

    CHECK(st.scatter(0, 0) == doctest::Approx(1.0));
    CHECK(st.scatter(0, 1) == doctest::Approx(1.0));
    CHECK(st.scatter(1, 0) == doctest::Approx(1.0));
    CHECK(st.scatter(1, 1) == doctest::Approx(2.0));
    CHECK(delta.evicted(0, 0) == 1.0);
    CHECK(delta.evicted(1, 0) == 0.0);
    CHECK(delta.added(0, 0) == 1.0);
    CHECK(st.window_start == 1);
    CHECK(st.updates_applied == 1);
}

TEST_CASE("covariance normalizes the scatter and adds the ridge") {
    covstream::CovarianceState st;
    st.k = 2;
    st.ns = 3;
    st.cy = 1;
    st.ridge = 0.5;
    st.scatter = Mat::identity(2);
    Mat c = covstream::covariance(st);
    CHECK(c(0, 0) == doctest::Approx(1.0));  // 1/(ns-1) + ridge
    CHECK(c(0, 1) == 0.0);
}

TEST_CASE("sliding equals batch recompute over long streams") {
    std::mt19937_64 eng(0x57eaULL);
    for (auto [k, ns, cy] : {std::array<std::size_t, 3>{2, 11, 1},
                             std::array<std::size_t, 3>{5, 16, 3},
                             std::array<std::size_t, 3>{8, 24, 2}}) {
        const std::size_t slides = 40;
        EegWindow stream = random_window(eng, k, ns + slides * cy);
        auto st = covstream::init_state(slice(stream, 0, ns), cy, 0.0);
        for (std::size_t m = 0; m < slides; ++m) {
            covstream::slide(st, block(stream, ns + m * cy, cy));
            CHECK(st.window_start == (m + 1) * cy);
            Mat maintained = covstream::covariance(st);
            Mat batch = covstream::batch_covariance(slice(stream, (m + 1) * cy, ns), false);
            CHECK(frobenius_distance(maintained, batch) <=
                  1e-9 * (1.0 + frobenius_norm(batch)));
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = i + 1; j < k; ++j)
                    CHECK(maintained(i, j) == maintained(j, i));
        }
    }
}

TEST_CASE("slide with the identical block leaves the scatter unchanged") {
    std::mt19937_64 eng(0x1d3aULL);
    EegWindow w = random_window(eng, 3, 9);
    auto st = covstream::init_state(w, 2, 0.0);
    Mat before = st.scatter;
    covstream::slide(st, block(w, 0, 2));  // re-adds what gets evicted
    CHECK(frobenius_distance(st.scatter, before) <= 1e-12 * (1.0 + frobenius_norm(before)));
}

TEST_CASE("slide rejects malformed blocks") {
    std::mt19937_64 eng(0xb10cULL);
    EegWindow w = random_window(eng, 3, 9);
    auto st = covstream::init_state(w, 2, 0.0);
    CHECK_THROWS_AS(covstream::slide(st, Mat(3, 1)), ParameterError);
    CHECK_THROWS_AS(covstream::slide(st, Mat(2, 2)), ParameterError);
    Mat bad(3, 2);
    bad(0, 0) = std::nan("");
    CHECK_THROWS_AS(covstream::slide(st, bad), DataError);
}

TEST_CASE("ridge keeps the exposed covariance positive definite") {
    // k=3 so the closed-form eigensolver can verify lambda_min >= ridge - tol.
    EegWindow w(3, 8);
    std::mt19937_64 eng(0x9d5fULL);
    std::normal_distribution<double> g(0.0, 1.0);
    double base[8];
    for (auto& x : base) x = g(eng);
    for (std::size_t t = 0; t < 8; ++t) {
        double v = base[t];
        w.at(0, t) = v;
        w.at(1, t) = 2 * v;  // rank-1 stream
        w.at(2, t) = -v;
    }
    const double ridge = 1e-4;
    auto st = covstream::init_state(w, 1, ridge);
    Mat c = covstream::covariance(st);
    auto a = eig3::Sym3::from_rows({{{c(0, 0), c(0, 1), c(0, 2)},
                                     {c(1, 0), c(1, 1), c(1, 2)},
                                     {c(2, 0), c(2, 1), c(2, 2)}}});
    auto ev = eig3::eigvals_sym3(a);
    CHECK(ev[0] >= ridge - 1e-10);
}
