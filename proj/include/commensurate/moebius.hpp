#pragma once

// Real Moebius transformations of the upper half-plane, identified with
// their negatives, plus the disk-model form reached through a fixed Cayley
// transform z -> (z - i)/(z + i). Half-plane matrices are the working
// representation; the disk form carries the polygon geometry and boundary
// angles.

#include <array>
#include <cmath>
#include <complex>
#include <limits>

#include "commensurate/errors.hpp"

namespace commensurate {

using Complex = std::complex<double>;

constexpr double kBoundaryInfinity = std::numeric_limits<double>::infinity();

struct MoebiusMap {
    // row-major [a b; c d], normalized to det 1
    double a = 1, b = 0, c = 0, d = 1;

    MoebiusMap() = default;
    MoebiusMap(double a_, double b_, double c_, double d_) : a(a_), b(b_), c(c_), d(d_) { normalize(); }

    void normalize() {
        double det = a * d - b * c;
        if (det <= 0) throw NumericError("moebius: nonpositive determinant");
        double s = std::sqrt(det);
        a /= s;
        b /= s;
        c /= s;
        d /= s;
    }

    static MoebiusMap identity() { return MoebiusMap(); }

    MoebiusMap operator*(const MoebiusMap& o) const {
        MoebiusMap m;
        m.a = a * o.a + b * o.c;
        m.b = a * o.b + b * o.d;
        m.c = c * o.a + d * o.c;
        m.d = c * o.b + d * o.d;
        return m;
    }

    MoebiusMap inverse() const {
        MoebiusMap m;
        m.a = d;
        m.b = -b;
        m.c = -c;
        m.d = a;
        return m;
    }

    Complex apply(Complex z) const { return (a * z + b) / (c * z + d); }

    // boundary action on R plus infinity
    double apply_boundary(double x) const {
        if (std::isinf(x)) {
            if (std::abs(c) < 1e-300) return kBoundaryInfinity;
            return a / c;
        }
        double den = c * x + d;
        if (std::abs(den) < 1e-300) return kBoundaryInfinity;
        return (a * x + b) / den;
    }

    double trace() const { return a + d; }
    double abs_trace() const { return std::abs(a + d); }

    bool is_hyperbolic(double tol = 1e-9) const { return abs_trace() > 2 + tol; }
    bool is_parabolic(double tol = 1e-9) const { return std::abs(abs_trace() - 2) <= tol; }
    bool is_elliptic(double tol = 1e-9) const { return abs_trace() < 2 - tol; }

    // Frobenius distance modulo sign.
    double dist(const MoebiusMap& o) const {
        auto frob = [](double da, double db, double dc, double dd) {
            return std::sqrt(da * da + db * db + dc * dc + dd * dd);
        };
        return std::min(frob(a - o.a, b - o.b, c - o.c, d - o.d),
                        frob(a + o.a, b + o.b, c + o.c, d + o.d));
    }

    double dist_identity() const { return dist(MoebiusMap::identity()); }
};

// Attracting and repelling fixed points on the boundary of the half-plane.
struct BoundaryFixedPoints {
    double attracting;
    double repelling;
};

// Roots of c x^2 + (d - a) x - b via the cancellation-free quadratic
// formula; near-diagonal and near-triangular matrices need the stable
// branches or the fixed points degenerate into rounding noise.
inline BoundaryFixedPoints hyperbolic_fixed_points(const MoebiusMap& m) {
    if (!m.is_hyperbolic(1e-12)) throw NumericError("fixed points: map is not hyperbolic");
    double sq = std::sqrt(m.trace() * m.trace() - 4);
    double A = m.c, B = m.d - m.a, C = -m.b;
    if (std::abs(A) * 1e14 < std::abs(B) + sq) {
        //  z -> (a z + b)/d ; fixes infinity and b/(d-a)
        double other = m.b / (m.d - m.a);
        bool inf_attracts = std::abs(m.a) > std::abs(m.d);
        return inf_attracts ? BoundaryFixedPoints{kBoundaryInfinity, other}
                            : BoundaryFixedPoints{other, kBoundaryInfinity};
    }
    double q = -(B + (B >= 0 ? 1.0 : -1.0) * sq) / 2;
    double x1, x2;
    if (std::abs(q) * 1e14 < std::abs(A) + std::abs(C)) {
        x1 = 0.0;
        x2 = -B / A;
    } else {
        x1 = q / A;
        x2 = C / q;
    }
    // derivative 1/(c x + d)^2; attracting iff |c x + d| > 1
    double d1 = std::abs(m.c * x1 + m.d);
    return d1 > 1 ? BoundaryFixedPoints{x1, x2} : BoundaryFixedPoints{x2, x1};
}

// --- disk model ----------------------------------------------------------

inline Complex cayley_to_disk(Complex z) { return (z - Complex(0, 1)) / (z + Complex(0, 1)); }
inline Complex cayley_to_half(Complex w) {
    return Complex(0, 1) * (Complex(1, 0) + w) / (Complex(1, 0) - w);
}

// boundary point of the half-plane -> angle on the unit circle
inline double boundary_angle(double x) {
    if (std::isinf(x)) return 0.0;
    Complex w = (Complex(x, 0) - Complex(0, 1)) / (Complex(x, 0) + Complex(0, 1));
    return std::arg(w);
}

// Disk automorphism  z -> (a z + b) / (conj(b) z + conj(a)),  |a|^2-|b|^2 = 1.
struct DiskMap {
    Complex a{1, 0}, b{0, 0};

    DiskMap() = default;
    DiskMap(Complex a_, Complex b_) : a(a_), b(b_) { normalize(); }

    void normalize() {
        double n = std::norm(a) - std::norm(b);
        if (n <= 0) throw NumericError("disk map: |a|^2 - |b|^2 must be positive");
        double s = std::sqrt(n);
        a /= s;
        b /= s;
    }

    static DiskMap identity() { return DiskMap(); }

    static DiskMap rotation(double phi) { return DiskMap(std::polar(1.0, phi / 2), Complex(0, 0)); }

    // sends p to 0
    static DiskMap to_origin(Complex p) { return DiskMap(Complex(1, 0), -p); }

    DiskMap operator*(const DiskMap& o) const {
        return DiskMap(a * o.a + b * std::conj(o.b), a * o.b + b * std::conj(o.a));
    }

    DiskMap inverse() const { return DiskMap(std::conj(a), -b); }

    Complex apply(Complex z) const { return (a * z + b) / (std::conj(b) * z + std::conj(a)); }

    // derivative of the action at z
    Complex derivative(Complex z) const {
        Complex den = std::conj(b) * z + std::conj(a);
        return Complex(1, 0) / (den * den);
    }

    double dist(const DiskMap& o) const {
        auto f = [](Complex u, Complex v) { return std::sqrt(std::norm(u) + std::norm(v)); };
        return std::min(f(a - o.a, b - o.b), f(a + o.a, b + o.b));
    }
};

// conjugation by the Cayley transform, both directions
inline DiskMap to_disk(const MoebiusMap& m) {
    // C M C^{-1} with C = [1 -i; 1 i]
    Complex ma(m.a, 0), mb(m.b, 0), mc(m.c, 0), md(m.d, 0);
    Complex i(0, 1);
    // C M = [a - i c,  b - i d ;  a + i c,  b + i d]
    Complex p = ma - i * mc, q = mb - i * md;
    Complex r = ma + i * mc, s = mb + i * md;
    // (C M) C^{-1},  C^{-1} = (1/(2i)) [i  i; -1  1]
    Complex inv_det(0, -0.5);  // 1/(2i)
    Complex aa = inv_det * (p * i - q);
    Complex bb = inv_det * (p * i + q);
    Complex cc = inv_det * (r * i - s);
    Complex dd = inv_det * (r * i + s);
    (void)cc;
    (void)dd;
    return DiskMap(aa, bb);
}

inline MoebiusMap to_half_plane(const DiskMap& m) {
    // C^{-1} M C
    Complex i(0, 1);
    Complex aa = m.a, bb = m.b, cc = std::conj(m.b), dd = std::conj(m.a);
    // M C = [a + b, -i a + i b ; c + d, -i c + i d]
    Complex p = aa + bb, q = i * (bb - aa);
    Complex r = cc + dd, s = i * (dd - cc);
    // C^{-1} (M C)
    Complex inv_det(0, -0.5);
    Complex ha = inv_det * (i * p + i * r);
    Complex hb = inv_det * (i * q + i * s);
    Complex hc = inv_det * (-p + r);
    Complex hd = inv_det * (-q + s);
    double imag_leak = std::abs(ha.imag()) + std::abs(hb.imag()) + std::abs(hc.imag()) + std::abs(hd.imag());
    if (imag_leak > 1e-8) throw NumericError("disk map does not descend to a real matrix");
    return MoebiusMap(ha.real(), hb.real(), hc.real(), hd.real());
}

// hyperbolic metric in the disk
inline double disk_distance(Complex z, Complex w) {
    double t = std::abs((z - w) / (Complex(1, 0) - std::conj(w) * z));
    t = std::min(t, 1.0 - 1e-16);
    return 2 * std::atanh(t);
}

// area element factor (2/(1-|z|^2))^2 relative to Lebesgue measure
inline double disk_area_density(Complex z) {
    double r2 = std::norm(z);
    double f = 2.0 / (1.0 - r2);
    return f * f;
}

}  // namespace commensurate
