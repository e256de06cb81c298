#include "eegbeam/eig3.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include "eegbeam/errors.hpp"
#include "eegbeam/flops.hpp"

namespace eegbeam::eig3 {

namespace {

// Nominal multiply-add costs, charged per call so closed-form vs iterative
// orientation costs show up in the benchmark counters.
constexpr std::uint64_t kEigvalsMacs = 45;
constexpr std::uint64_t kCaseMacs = 40;
constexpr std::uint64_t kRotationMacs = 30;

struct Shifted {
    double b11, b22, b33, b12, b13, b23;
};

double residual_shifted(const Shifted& b, const Vec3& v) {
    Vec3 r = {b.b11 * v[0] + b.b12 * v[1] + b.b13 * v[2],
              b.b12 * v[0] + b.b22 * v[1] + b.b23 * v[2],
              b.b13 * v[0] + b.b23 * v[1] + b.b33 * v[2]};
    return norm3(r);
}

struct Candidate {
    Vec3 v;
    double resid;
    bool from_table;
};

void consider(std::optional<Candidate>& best, const Candidate& c) {
    if (!best || c.resid < best->resid) best = c;
}

// Null vector of the 2x2 block [[d1, o], [o, d2]]; the row with the larger
// diagonal entry is the better conditioned one.
std::array<double, 2> null2(double d1, double o, double d2) {
    if (std::fabs(d1) >= std::fabs(d2)) return {-o, d1};
    return {-d2, o};
}

} // namespace

double Sym3::norm_fro() const {
    return std::sqrt(a11 * a11 + a22 * a22 + a33 * a33 +
                     2.0 * (a12 * a12 + a13 * a13 + a23 * a23));
}

bool Sym3::finite() const {
    return std::isfinite(a11) && std::isfinite(a22) && std::isfinite(a33) &&
           std::isfinite(a12) && std::isfinite(a13) && std::isfinite(a23);
}

std::array<double, 3> eigvals_sym3(const Sym3& a) {
    if (!a.finite()) throw DataError("eigvals_sym3: non-finite input");
    flops::add(kEigvalsMacs);

    const double q = (a.a11 + a.a22 + a.a33) / 3.0;
    const double p1 = a.a12 * a.a12 + a.a13 * a.a13 + a.a23 * a.a23;
    const double d1 = a.a11 - q, d2 = a.a22 - q, d3 = a.a33 - q;
    const double p2 = d1 * d1 + d2 * d2 + d3 * d3 + 2.0 * p1;

    const double fro2 = a.norm_fro();
    if (p2 <= 1e-30 * (1.0 + fro2 * fro2)) return {q, q, q}; // scalar multiple of I

    const double p = std::sqrt(p2 / 6.0);
    // B = (A - qI)/p; r = det(B)/2 lands in [-1, 1] for exact arithmetic.
    const double b11 = d1 / p, b22 = d2 / p, b33 = d3 / p;
    const double b12 = a.a12 / p, b13 = a.a13 / p, b23 = a.a23 / p;
    double detb = b11 * (b22 * b33 - b23 * b23) - b12 * (b12 * b33 - b23 * b13) +
                  b13 * (b12 * b23 - b22 * b13);
    double r = std::clamp(detb / 2.0, -1.0, 1.0);

    const double phi = std::acos(r) / 3.0;
    const double two_pi_3 = 2.0 * std::numbers::pi / 3.0;
    double l3 = q + 2.0 * p * std::cos(phi);
    double l1 = q + 2.0 * p * std::cos(phi + two_pi_3);
    double l2 = 3.0 * q - l1 - l3;

    std::array<double, 3> ev = {l1, l2, l3};
    std::sort(ev.begin(), ev.end());
    return ev;
}

EigvecResult eigvec_sym3(const Sym3& a, double lambda) {
    if (!a.finite() || !std::isfinite(lambda))
        throw DataError("eigvec_sym3: non-finite input");
    flops::add(kCaseMacs);

    const double scale = 1.0 + a.norm_fro();
    const double tol_elem = 1e-12 * scale;
    const double tol_det = 1e-12 * scale * scale;

    // Repeated-eigenvalue detection drives the degeneracy flag.
    const auto ev = eigvals_sym3(a);
    const double deg_tol = 1e-8 * scale;
    int matches = 0;
    for (double e : ev)
        if (std::fabs(e - lambda) <= deg_tol) ++matches;
    const bool multiple = matches >= 2;

    const Shifted b = {a.a11 - lambda, a.a22 - lambda, a.a33 - lambda,
                       a.a12, a.a13, a.a23};

    const bool z12 = std::fabs(b.b12) <= tol_elem;
    const bool z13 = std::fabs(b.b13) <= tol_elem;
    const bool z23 = std::fabs(b.b23) <= tol_elem;

    // Diagonal: pick the axis whose shifted entry vanishes.
    if (z12 && z13 && z23) {
        std::array<double, 3> d = {std::fabs(b.b11), std::fabs(b.b22), std::fabs(b.b33)};
        std::size_t arg = std::min_element(d.begin(), d.end()) - d.begin();
        Vec3 v = {0, 0, 0};
        v[arg] = 1.0;
        return {v, multiple};
    }

    // One coupled 2x2 block plus a decoupled axis.
    if (z12 && z13) { // block spans (2,3), axis 1 decoupled
        if (std::fabs(b.b11) <= tol_elem &&
            std::fabs(b.b22 * b.b33 - b.b23 * b.b23) > tol_det)
            return {{1, 0, 0}, multiple};
        auto [x, y] = null2(b.b22, b.b23, b.b33);
        return {canonical_sign3(normalized3({0, x, y})), multiple};
    }
    if (z12 && z23) { // block spans (1,3), axis 2 decoupled
        if (std::fabs(b.b22) <= tol_elem &&
            std::fabs(b.b11 * b.b33 - b.b13 * b.b13) > tol_det)
            return {{0, 1, 0}, multiple};
        auto [x, y] = null2(b.b11, b.b13, b.b33);
        return {canonical_sign3(normalized3({x, 0, y})), multiple};
    }
    if (z13 && z23) { // block spans (1,2), axis 3 decoupled
        if (std::fabs(b.b33) <= tol_elem &&
            std::fabs(b.b11 * b.b22 - b.b12 * b.b12) > tol_det)
            return {{0, 0, 1}, multiple};
        auto [x, y] = null2(b.b11, b.b12, b.b22);
        return {canonical_sign3(normalized3({x, y, 0})), multiple};
    }

    // General case: nine closed-form parametrizations, tried in order. Each
    // solves two rows of (A - lambda I)v = 0 for the free components and
    // eliminates with the third; guards keep divisors away from zero.
    std::optional<Candidate> best;
    bool any_guard_passed = false;
    const double accept = 1e-12 * scale;

    auto try_pq1 = [&](double den, double num_q, double div, double m1, double m0) {
        // v = (P, Q, 1): Q = num_q/den, P = -(m1*Q + m0)/div
        if (std::fabs(den) <= tol_det || std::fabs(div) <= tol_elem) return false;
        any_guard_passed = true;
        double qv = num_q / den;
        double pv = -(m1 * qv + m0) / div;
        Vec3 v = normalized3({pv, qv, 1.0});
        Candidate c{v, residual_shifted(b, v), true};
        consider(best, c);
        return c.resid <= accept;
    };
    auto try_p1q = [&](double den, double num_p, double div, double m1, double m0) {
        // v = (P, Q, 1): P = num_p/den, Q = -(m1*P + m0)/div
        if (std::fabs(den) <= tol_det || std::fabs(div) <= tol_elem) return false;
        any_guard_passed = true;
        double pv = num_p / den;
        double qv = -(m1 * pv + m0) / div;
        Vec3 v = normalized3({pv, qv, 1.0});
        Candidate c{v, residual_shifted(b, v), true};
        consider(best, c);
        return c.resid <= accept;
    };
    auto try_p1r = [&](double den, double num_p, double div, double m1, double m0) {
        // v = (P, 1, R): P = num_p/den, R = -(m1*P + m0)/div
        if (std::fabs(den) <= tol_det || std::fabs(div) <= tol_elem) return false;
        any_guard_passed = true;
        double pv = num_p / den;
        double rv = -(m1 * pv + m0) / div;
        Vec3 v = normalized3({pv, 1.0, rv});
        Candidate c{v, residual_shifted(b, v), true};
        consider(best, c);
        return c.resid <= accept;
    };

    bool done =
        // rows (1,2) for Q, eliminate with row 3
        try_pq1(b.b12 * b.b12 - b.b11 * b.b22, b.b11 * b.b23 - b.b13 * b.b12, b.b13,
                b.b23, b.b33) ||
        // rows (1,3) for Q, eliminate with row 2
        try_pq1(b.b12 * b.b13 - b.b11 * b.b23, b.b11 * b.b33 - b.b13 * b.b13, b.b12,
                b.b22, b.b23) ||
        // rows (2,3) for Q, eliminate with row 1
        try_pq1(b.b22 * b.b13 - b.b12 * b.b23, b.b12 * b.b33 - b.b23 * b.b13, b.b11,
                b.b12, b.b13) ||
        // rows (1,2) for P, eliminate with row 3
        try_p1q(b.b11 * b.b22 - b.b12 * b.b12, b.b12 * b.b23 - b.b13 * b.b22, b.b23,
                b.b13, b.b33) ||
        // rows (1,3) for P, eliminate with row 2
        try_p1q(b.b11 * b.b23 - b.b12 * b.b13, b.b12 * b.b33 - b.b13 * b.b23, b.b22,
                b.b12, b.b23) ||
        // rows (2,3) for P, eliminate with row 1
        try_p1q(b.b12 * b.b23 - b.b22 * b.b13, b.b22 * b.b33 - b.b23 * b.b23, b.b12,
                b.b11, b.b13) ||
        // v = (P, 1, R) family, same row pairs
        try_p1r(b.b11 * b.b23 - b.b13 * b.b12, b.b13 * b.b22 - b.b12 * b.b23, b.b33,
                b.b13, b.b23) ||
        try_p1r(b.b11 * b.b33 - b.b13 * b.b13, b.b13 * b.b23 - b.b12 * b.b33, b.b23,
                b.b12, b.b22) ||
        try_p1r(b.b12 * b.b33 - b.b23 * b.b13, b.b23 * b.b23 - b.b22 * b.b33, b.b13,
                b.b11, b.b12);
    (void)done;

    // Cross products of the shifted rows span the null space when every
    // parametrization is ill conditioned.
    {
        const Vec3 r0 = {b.b11, b.b12, b.b13};
        const Vec3 r1 = {b.b12, b.b22, b.b23};
        const Vec3 r2 = {b.b13, b.b23, b.b33};
        Vec3 crosses[3] = {cross3(r0, r1), cross3(r0, r2), cross3(r1, r2)};
        const Vec3* top = nullptr;
        double top_norm = tol_det;
        for (const Vec3& c : crosses) {
            double n = norm3(c);
            if (n > top_norm) {
                top_norm = n;
                top = &c;
            }
        }
        if (top) {
            Vec3 v = normalized3(*top);
            consider(best, {v, residual_shifted(b, v), false});
        }
    }

    if (!best) {
        // (A - lambda I) is numerically zero in every usable direction:
        // lambda has full multiplicity, any axis serves.
        std::array<double, 3> d = {std::fabs(b.b11), std::fabs(b.b22), std::fabs(b.b33)};
        std::size_t arg = std::min_element(d.begin(), d.end()) - d.begin();
        Vec3 v = {0, 0, 0};
        v[arg] = 1.0;
        return {v, true};
    }

    return {canonical_sign3(best->v), multiple || !any_guard_passed};
}

EigvecResult smallest_eigvec(const Sym3& a) {
    const auto ev = eigvals_sym3(a);
    return eigvec_sym3(a, ev[0]);
}

EigenSystem3 eigensystem_sym3(const Sym3& a) {
    EigenSystem3 out;
    out.values = eigvals_sym3(a);
    for (std::size_t i = 0; i < 3; ++i) {
        auto r = eigvec_sym3(a, out.values[i]);
        out.vectors[i] = r.v;
        out.degenerate = out.degenerate || r.degenerate;
    }
    return out;
}

EigenSystem3 jacobi_sym3(const Sym3& s) {
    if (!s.finite()) throw DataError("jacobi_sym3: non-finite input");

    double a[3][3] = {{s.a11, s.a12, s.a13}, {s.a12, s.a22, s.a23}, {s.a13, s.a23, s.a33}};
    double v[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    const double fro = s.norm_fro();
    const double stop = 1e-30 * (1.0 + fro * fro);
    constexpr int kPairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};

    std::uint64_t rotations = 0;
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        if (off <= stop) break;
        for (auto [p, q] : kPairs) {
            double apq = a[p][q];
            if (std::fabs(apq) <= 1e-300) continue;
            double theta = (a[q][q] - a[p][p]) / (2.0 * apq);
            double t;
            if (std::fabs(theta) > 1e150)
                t = 1.0 / (2.0 * theta);
            else
                t = std::copysign(1.0, theta) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
            double c = 1.0 / std::sqrt(t * t + 1.0);
            double sn = t * c;

            double app = a[p][p], aqq = a[q][q];
            a[p][p] = app - t * apq;
            a[q][q] = aqq + t * apq;
            a[p][q] = a[q][p] = 0.0;
            int r = 3 - p - q;
            double arp = a[r][p], arq = a[r][q];
            a[r][p] = a[p][r] = c * arp - sn * arq;
            a[r][q] = a[q][r] = sn * arp + c * arq;
            for (int i = 0; i < 3; ++i) {
                double vip = v[i][p], viq = v[i][q];
                v[i][p] = c * vip - sn * viq;
                v[i][q] = sn * vip + c * viq;
            }
            ++rotations;
        }
    }
    flops::add(kRotationMacs * rotations + 12);

    EigenSystem3 out;
    std::array<std::size_t, 3> order = {0, 1, 2};
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return a[i][i] < a[j][j]; });
    for (std::size_t i = 0; i < 3; ++i) {
        std::size_t c = order[i];
        out.values[i] = a[c][c];
        out.vectors[i] = canonical_sign3({v[0][c], v[1][c], v[2][c]});
    }
    const double deg_tol = 1e-8 * (1.0 + fro);
    out.degenerate = (out.values[1] - out.values[0] <= deg_tol) ||
                     (out.values[2] - out.values[1] <= deg_tol);
    return out;
}

double eig_residual(const Sym3& a, double lambda, const Vec3& v) {
    Vec3 av = a.apply(v);
    return norm3({av[0] - lambda * v[0], av[1] - lambda * v[1], av[2] - lambda * v[2]});
}

} // namespace eegbeam::eig3
