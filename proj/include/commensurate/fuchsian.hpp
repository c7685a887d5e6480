#pragma once

// Numeric Fuchsian machinery: the regular 4g-gon surface group with its
// fundamental domain, point reduction and exact-word membership for Moebius
// maps, Fricke normalization, and a least-squares solver for relation-exact
// representations of arbitrary finite presentations.

#include <optional>
#include <vector>

#include "commensurate/moebius.hpp"
#include "commensurate/numeric.hpp"
#include "commensurate/word.hpp"

namespace commensurate {

// A finite presentation the numeric side can host: relators over some
// alphabet (the standard surface presentation or a Schreier presentation).
struct GroupPresentation {
    int num_gens = 0;
    std::vector<Word> relators;

    static GroupPresentation surface(const SurfaceGroupPresentation& p) {
        return GroupPresentation{p.num_generators(), {p.relator()}};
    }
};

struct FuchsianRep {
    GroupPresentation pres;
    std::vector<MoebiusMap> gens;
    bool normalized = false;

    MoebiusMap eval(const Word& w) const {
        MoebiusMap m;
        for (Letter x : w.letters) {
            int k = x > 0 ? x : -x;
            if (k > static_cast<int>(gens.size())) throw InvariantError("rep: letter outside alphabet");
            m = m * (x > 0 ? gens[k - 1] : gens[k - 1].inverse());
        }
        return m;
    }

    // max over relators of Frobenius distance to +-identity
    double relation_residual() const {
        double worst = 0;
        for (const Word& r : relators_or_empty()) worst = std::max(worst, eval(r).dist_identity());
        return worst;
    }

    const std::vector<Word>& relators_or_empty() const { return pres.relators; }

    FuchsianRep conjugated(const MoebiusMap& t) const {
        FuchsianRep out = *this;
        MoebiusMap ti = t.inverse();
        for (auto& g : out.gens) g = t * g * ti;
        return out;
    }
};

// --- the regular 4g-gon group ---------------------------------------------

struct PolygonEdge {
    Complex v0, v1;      // endpoints, disk model
    Letter label;        // boundary letter
    Complex circ_center; // geodesic support circle (orthogonal to the unit circle)
    double circ_radius;
};

class FundamentalPolygon {
public:
    int genus = 2;
    std::vector<Complex> vertices;           // disk model
    std::vector<PolygonEdge> edges;          // edge k joins vertices k, k+1
    std::vector<DiskMap> disk_gens;          // one per generator
    FuchsianRep rep;                         // real half-plane matrices
    double containment_tol = 1e-12;

    const DiskMap& disk_gen(Letter x) const { return x > 0 ? disk_gens[x - 1] : inv_gens_[-x - 1]; }

    DiskMap eval_disk(const Word& w) const {
        DiskMap m;
        for (Letter x : w.letters) m = m * disk_gen(x);
        return m;
    }

    // z weakly inside every edge geodesic (center side)
    bool contains(Complex z, double tol = 0.0) const {
        for (const auto& e : edges)
            if (std::abs(z - e.circ_center) < e.circ_radius - tol) return false;
        return true;
    }

    double area() const {
        // Gauss-Bonnet from the angle sum: (n-2) pi - sum of interior angles
        int n = static_cast<int>(edges.size());
        double angle_sum = 0;
        for (int k = 0; k < n; ++k) {
            const auto& e_prev = edges[(k + n - 1) % n];
            const auto& e_next = edges[k];
            Complex v = vertices[k];
            // arc tangents at v, oriented toward the respective far endpoints
            Complex t1 = (v - e_prev.circ_center) * Complex(0, 1);
            if ((std::conj(t1) * (e_prev.v0 - v)).real() < 0) t1 = -t1;
            Complex t2 = (v - e_next.circ_center) * Complex(0, 1);
            if ((std::conj(t2) * (e_next.v1 - v)).real() < 0) t2 = -t2;
            double ang = std::abs(std::arg(t2 / t1));
            angle_sum += ang;
        }
        return (n - 2) * M_PI - angle_sum;
    }

    // Pull z into the closed polygon by greedy distance descent over the
    // generator set. Returns the reduced point and the word u with
    // rho(u) z = z_reduced.
    struct Reduction {
        Complex point;
        Word word;
        int steps = 0;
    };

    Reduction reduce(Complex z, int max_steps = 4000) const {
        Word u;
        int steps = 0;
        while (!contains(z, -1e-13) && steps < max_steps) {
            double best = disk_distance(z, Complex(0, 0));
            int best_letter = 0;
            Complex best_z;
            for (int k = 1; k <= 2 * genus; ++k) {
                for (Letter x : {Letter(k), Letter(-k)}) {
                    Complex cand = disk_gen(x).apply(z);
                    double d = disk_distance(cand, Complex(0, 0));
                    if (d < best - 1e-15) {
                        best = d;
                        best_letter = x;
                        best_z = cand;
                    }
                }
            }
            if (best_letter == 0) break;  // no improving move; point sits on a tile boundary
            z = best_z;
            std::vector<Letter> nu = {best_letter};
            nu.insert(nu.end(), u.letters.begin(), u.letters.end());
            u = freely_reduce(nu);
            ++steps;
        }
        if (!contains(z, -1e-10))
            throw NumericError("polygon reduction stalled near a tile boundary");
        return Reduction{z, u, steps};
    }

    // Exact-word membership of a Moebius map in the polygon group. Returns
    // the word w with rho(w) = m (mod sign), or nullopt.
    std::optional<Word> membership(const MoebiusMap& m, double point_tol = 1e-7,
                                   double ambiguity_guard = 1e-4) const {
        DiskMap dm = to_disk(m);
        Complex z0 = basepoint();
        Complex img = dm.apply(z0);
        Reduction red = reduce(img);
        double gap = disk_distance(red.point, z0);
        if (gap >= point_tol && gap < ambiguity_guard)
            throw NumericError("membership: reduced point inside the ambiguity guard band");
        if (gap >= point_tol) return std::nullopt;
        DiskMap n = eval_disk(red.word) * dm;
        if (n.dist(DiskMap::identity()) > 1e-6) return std::nullopt;  // elliptic fixing z0 impossible; guards numerics
        return inverse(red.word);
    }

    static Complex basepoint() { return Complex(0.071, 0.113); }

private:
    friend FundamentalPolygon polygon_group(int genus, double residual_tol);
    std::vector<DiskMap> inv_gens_;

public:
    void finalize_inverses() {
        inv_gens_.clear();
        for (const auto& g : disk_gens) inv_gens_.push_back(g.inverse());
    }
};

namespace detail {

inline PolygonEdge make_edge(Complex v0, Complex v1, Letter label) {
    // support circle orthogonal to the unit circle through v0, v1:
    // 2 Re(conj(m) z) = |z|^2 + 1 for both endpoints
    double a1 = 2 * v0.real(), b1 = 2 * v0.imag(), c1 = std::norm(v0) + 1;
    double a2 = 2 * v1.real(), b2 = 2 * v1.imag(), c2 = std::norm(v1) + 1;
    double det = a1 * b2 - a2 * b1;
    if (std::abs(det) < 1e-12) throw NumericError("polygon edge through the origin");
    double mx = (c1 * b2 - c2 * b1) / det;
    double my = (a1 * c2 - a2 * c1) / det;
    Complex center(mx, my);
    double radius = std::sqrt(std::norm(center) - 1.0);
    return PolygonEdge{v0, v1, label, center, radius};
}

// unique disk isometry with src0 -> dst0, src1 -> dst1 (equal separations)
inline DiskMap segment_map(Complex src0, Complex src1, Complex dst0, Complex dst1) {
    DiskMap t1 = DiskMap::to_origin(src0);
    Complex dir1 = t1.apply(src1);
    DiskMap n1 = DiskMap::rotation(-std::arg(dir1)) * t1;
    DiskMap t2 = DiskMap::to_origin(dst0);
    Complex dir2 = t2.apply(dst1);
    DiskMap n2 = DiskMap::rotation(-std::arg(dir2)) * t2;
    return n2.inverse() * n1;
}

}  // namespace detail

// Side pairings of the regular hyperbolic 4g-gon with vertex angle 2 pi / 4g.
// Reading the boundary counterclockwise with labels a_j, b_j^-1, a_j^-1, b_j
// per handle and gluing each negative edge onto its positive edge with
// reversed traversal yields hyperbolic generators satisfying the standard
// relator prod [a_j, b_j].
inline FundamentalPolygon polygon_group(int genus, double residual_tol = 1e-9) {
    if (genus < 2) throw PreconditionError("polygon_group: genus must be >= 2");
    FundamentalPolygon P;
    P.genus = genus;
    int n = 4 * genus;
    double cot = 1.0 / std::tan(M_PI / n);
    double cosh_dv = cot * cot;
    double dv = std::acosh(cosh_dv);
    double rv = std::tanh(dv / 2);
    for (int k = 0; k < n; ++k) P.vertices.push_back(std::polar(rv, 2 * M_PI * k / n));

    SurfaceGroupPresentation sp(genus);
    std::vector<Letter> labels;
    for (int j = 1; j <= genus; ++j) {
        labels.push_back(sp.a(j));
        labels.push_back(-sp.b(j));
        labels.push_back(-sp.a(j));
        labels.push_back(sp.b(j));
    }
    for (int k = 0; k < n; ++k)
        P.edges.push_back(detail::make_edge(P.vertices[k], P.vertices[(k + 1) % n], labels[k]));

    P.disk_gens.resize(2 * genus);
    for (int g = 1; g <= 2 * genus; ++g) {
        int pos = -1, neg = -1;
        for (int k = 0; k < n; ++k) {
            if (P.edges[k].label == g) pos = k;
            if (P.edges[k].label == -g) neg = k;
        }
        if (pos < 0 || neg < 0) throw InvariantError("polygon: label missing from boundary word");
        const auto& ep = P.edges[pos];
        const auto& en = P.edges[neg];
        // glue the x^-1 edge onto the x edge, reversing traversal
        P.disk_gens[g - 1] = detail::segment_map(en.v0, en.v1, ep.v1, ep.v0);
    }
    P.finalize_inverses();

    P.rep.pres = GroupPresentation::surface(sp);
    for (const auto& dg : P.disk_gens) P.rep.gens.push_back(to_half_plane(dg));
    double res = P.rep.relation_residual();
    if (res > residual_tol)
        throw NumericError("polygon_group: relation residual " + std::to_string(res) + " above tolerance");
    return P;
}

// --- Fricke normalization --------------------------------------------------

namespace detail {

// Moebius map sending (x1, x2, x3) to (0, inf, 1); any of the x_i may be inf.
inline MoebiusMap three_point_map(double x1, double x2, double x3) {
    // rows of [a b; c d] from the cross ratio (z - x1)(x3 - x2) / ((z - x2)(x3 - x1))
    double a, b, c, d;
    if (std::isinf(x1)) {
        a = 0;
        b = x3 - x2;
        c = 1;
        d = -x2;
    } else if (std::isinf(x2)) {
        a = 1;
        b = -x1;
        c = 0;
        d = x3 - x1;
    } else if (std::isinf(x3)) {
        a = 1;
        b = -x1;
        c = 1;
        d = -x2;
    } else {
        a = x3 - x2;
        b = -x1 * (x3 - x2);
        c = x3 - x1;
        d = -x2 * (x3 - x1);
    }
    double det = a * d - b * c;
    if (std::abs(det) < 1e-14) throw NumericError("three_point_map: degenerate triple");
    if (det > 0) return MoebiusMap(a, b, c, d);
    // orientation-incompatible: swap the roles of 0 and infinity
    return MoebiusMap(c, d, a, b);
}

}  // namespace detail

// Conjugate the representation so the axis of generator anchor_b runs from 0
// to infinity and the attracting fixed point of anchor_a lands at 1. Traces
// are unchanged; normalizing twice is idempotent up to roundoff.
inline FuchsianRep normalize_anchors(const FuchsianRep& r, int anchor_a, int anchor_b) {
    const MoebiusMap& gb = r.gens.at(anchor_b);
    const MoebiusMap& ga = r.gens.at(anchor_a);
    if (!gb.is_hyperbolic() || !ga.is_hyperbolic())
        throw NumericError("normalize_anchors: anchor generators must be hyperbolic");
    BoundaryFixedPoints fb = hyperbolic_fixed_points(gb);
    BoundaryFixedPoints fa = hyperbolic_fixed_points(ga);
    MoebiusMap t = detail::three_point_map(fb.attracting, fb.repelling, fa.attracting);
    FuchsianRep out = r.conjugated(t);
    out.normalized = true;
    return out;
}

// Standard Fricke anchors: the last two generators.
inline FuchsianRep fricke_normalize(const FuchsianRep& r) {
    int m = static_cast<int>(r.gens.size());
    if (m < 2) throw PreconditionError("fricke_normalize: need at least two generators");
    return normalize_anchors(r, m - 2, m - 1);
}

// --- representation solver --------------------------------------------------

struct SolveOptions {
    double residual_tol = 1e-9;
    int multistarts = 24;
    double perturbation = 0.25;
    std::uint64_t seed = 1;
    LMOptions lm;
    // When set, gauge is fixed by pulling toward the start instead of anchor
    // equations; the solution is the nearest point of the relation variety.
    bool use_anchors = true;
    double proximity_weight = 0.0;
};

namespace detail {

inline std::vector<double> pack_rep(const std::vector<MoebiusMap>& gens, const std::vector<int>& free_idx) {
    std::vector<double> x;
    for (int i : free_idx) {
        x.push_back(gens[i].a);
        x.push_back(gens[i].b);
        x.push_back(gens[i].c);
        x.push_back(gens[i].d);
    }
    return x;
}

struct RawRep {
    // evaluation without det normalization so the solver sees smooth residuals
    static std::array<double, 4> eval(const std::vector<std::array<double, 4>>& gens, const Word& w) {
        std::array<double, 4> m = {1, 0, 0, 1};
        for (Letter xx : w.letters) {
            int k = xx > 0 ? xx : -xx;
            std::array<double, 4> g = gens[k - 1];
            if (xx < 0) {
                double det = g[0] * g[3] - g[1] * g[2];
                g = {g[3] / det, -g[1] / det, -g[2] / det, g[0] / det};
            }
            m = {m[0] * g[0] + m[1] * g[2], m[0] * g[1] + m[1] * g[3], m[2] * g[0] + m[3] * g[2],
                 m[2] * g[1] + m[3] * g[3]};
        }
        return m;
    }
};

}  // namespace detail

// Solve for matrices satisfying the relators, with Fricke-style gauge
// anchors on two designated generators (axis of anchor_b pinned to (0, inf),
// attracting fixed point of anchor_a pinned to 1) and some generators
// optionally held fixed. Returns the first solution meeting the residual
// tolerance across multistarts.
inline FuchsianRep solve_presentation_rep(const GroupPresentation& pres,
                                          const std::vector<std::optional<MoebiusMap>>& fixed,
                                          const std::vector<MoebiusMap>& seed, int anchor_a, int anchor_b,
                                          const SolveOptions& opts = {}, double* best_residual_out = nullptr) {
    int m = pres.num_gens;
    if (static_cast<int>(fixed.size()) != m || static_cast<int>(seed.size()) != m)
        throw PreconditionError("solve_presentation_rep: seed/fixed size mismatch");
    std::vector<int> free_idx;
    for (int i = 0; i < m; ++i)
        if (!fixed[i]) free_idx.push_back(i);
    if (free_idx.empty()) throw PreconditionError("solve_presentation_rep: nothing to solve");

    auto unpack = [&](const std::vector<double>& x) {
        std::vector<std::array<double, 4>> gens(m);
        for (int i = 0; i < m; ++i)
            if (fixed[i]) gens[i] = {fixed[i]->a, fixed[i]->b, fixed[i]->c, fixed[i]->d};
        for (size_t j = 0; j < free_idx.size(); ++j)
            gens[free_idx[j]] = {x[4 * j], x[4 * j + 1], x[4 * j + 2], x[4 * j + 3]};
        return gens;
    };

    std::vector<double> prox_center = detail::pack_rep(seed, free_idx);
    ResidualFn residual = [&, m](const std::vector<double>& x) {
        auto gens = unpack(x);
        std::vector<double> out;
        for (const Word& rel : pres.relators) {
            auto prod = detail::RawRep::eval(gens, rel);
            // distance to the closer of +-identity
            double sp = (prod[0] - 1) * (prod[0] - 1) + prod[1] * prod[1] + prod[2] * prod[2] +
                        (prod[3] - 1) * (prod[3] - 1);
            double sm = (prod[0] + 1) * (prod[0] + 1) + prod[1] * prod[1] + prod[2] * prod[2] +
                        (prod[3] + 1) * (prod[3] + 1);
            double sign = sp <= sm ? 1.0 : -1.0;
            out.push_back(prod[0] - sign);
            out.push_back(prod[1]);
            out.push_back(prod[2]);
            out.push_back(prod[3] - sign);
        }
        for (int i = 0; i < m; ++i) {
            double det = gens[i][0] * gens[i][3] - gens[i][1] * gens[i][2];
            out.push_back(det - 1);
        }
        if (opts.use_anchors) {
            // anchors: gens[anchor_b] diagonal, gens[anchor_a] fixes 1
            out.push_back(gens[anchor_b][1]);
            out.push_back(gens[anchor_b][2]);
            out.push_back(gens[anchor_a][0] + gens[anchor_a][1] - gens[anchor_a][2] - gens[anchor_a][3]);
        }
        if (opts.proximity_weight > 0) {
            double wgt = std::sqrt(opts.proximity_weight);
            for (size_t j = 0; j < x.size(); ++j) out.push_back(wgt * (x[j] - prox_center[j]));
        }
        return out;
    };

    double best_res = 1e100;
    std::optional<FuchsianRep> best;
    auto rng = seeded_rng(opts.seed, 0xF01CE);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (int start = 0; start < opts.multistarts; ++start) {
        std::vector<MoebiusMap> init = seed;
        std::vector<double> x = detail::pack_rep(init, free_idx);
        if (start > 0) {
            double scale = opts.perturbation * (0.5 + 0.25 * start);
            for (double& v : x) v += scale * noise(rng);
        }
        double cost = 0;
        std::vector<double> sol = levenberg_marquardt(residual, x, opts.lm, &cost);
        auto gens = unpack(sol);
        bool valid = true;
        FuchsianRep rep;
        rep.pres = pres;
        for (int i = 0; i < m && valid; ++i) {
            double det = gens[i][0] * gens[i][3] - gens[i][1] * gens[i][2];
            if (det <= 0.5) valid = false;
            else rep.gens.push_back(MoebiusMap(gens[i][0], gens[i][1], gens[i][2], gens[i][3]));
        }
        if (!valid) continue;
        double res = rep.relation_residual();
        if (res < best_res) {
            best_res = res;
            rep.normalized = true;
            best = rep;
        }
        if (best_res < opts.residual_tol) break;
    }
    if (best_residual_out) *best_residual_out = best_res;
    if (!best || best_res > opts.residual_tol)
        throw NumericError("solve_presentation_rep: no solution below tolerance; best residual " +
                           std::to_string(best_res));
    return *best;
}

// Walk the solution variety by continuation: drift the generator entries in
// a fixed direction and re-solve after each small step. Starting from an
// exact normalized representation this stays in its connected component, so
// solutions deformed from a discrete faithful seed remain honest points
// rather than stray branches of the relation variety.
inline FuchsianRep deform_rep(const GroupPresentation& pres, const FuchsianRep& start_rep, int anchor_a,
                              int anchor_b, double step, int nsteps, std::uint64_t seed,
                              double residual_tol = 1e-9) {
    std::vector<std::optional<MoebiusMap>> fixed(pres.num_gens);
    auto rng = seeded_rng(seed, 0xDEF0);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> dir(4 * pres.num_gens);
    for (double& d : dir) d = noise(rng);
    std::vector<MoebiusMap> cur = start_rep.gens;
    for (int k = 0; k < nsteps; ++k) {
        std::vector<MoebiusMap> trial = cur;
        for (int i = 0; i < pres.num_gens; ++i) {
            double cand[4] = {trial[i].a + step * dir[4 * i], trial[i].b + step * dir[4 * i + 1],
                              trial[i].c + step * dir[4 * i + 2], trial[i].d + step * dir[4 * i + 3]};
            if (cand[0] * cand[3] - cand[1] * cand[2] > 0.1)
                trial[i] = MoebiusMap(cand[0], cand[1], cand[2], cand[3]);
        }
        // cascade of proximity weights: each solve stays local to the last,
        // so the walk cannot hop to another branch of the variety
        std::vector<MoebiusMap> landing = trial;
        double reached = 1e100;
        for (double weight : {1e-4, 1e-9, 1e-13}) {
            SolveOptions sopts;
            sopts.multistarts = 1;
            sopts.residual_tol = 1e100;  // accept the local landing, judge below
            sopts.use_anchors = false;
            sopts.proximity_weight = weight;
            FuchsianRep stage =
                solve_presentation_rep(pres, fixed, landing, anchor_a, anchor_b, sopts, &reached);
            landing = stage.gens;
            if (reached < residual_tol) break;
        }
        if (reached > residual_tol)
            throw NumericError("deform_rep: continuation step failed to re-solve; residual " +
                               std::to_string(reached));
        cur = landing;
    }
    FuchsianRep out;
    out.pres = pres;
    out.gens = cur;
    out.normalized = true;
    return out;
}

// Standard-presentation entry point: hold the supplied matrices for the
// first 2g-3 generators and fill in the last three so the surface relation
// and the Fricke anchors hold.
inline FuchsianRep solve_normalized_rep(const SurfaceGroupPresentation& p,
                                        const std::vector<MoebiusMap>& partial,
                                        const SolveOptions& opts = {}, double* best_residual_out = nullptr) {
    if (p.genus < 3) throw PreconditionError("solve_normalized_rep: genus must be >= 3");
    int m = p.num_generators();
    if (static_cast<int>(partial.size()) != m - 3)
        throw PreconditionError("solve_normalized_rep: expected matrices for the first 2g-3 generators");
    for (const auto& g : partial)
        if (!g.is_hyperbolic())
            throw NumericError("solve_normalized_rep: partial assignment must be hyperbolic");
    GroupPresentation pres = GroupPresentation::surface(p);
    std::vector<std::optional<MoebiusMap>> fixed(m);
    std::vector<MoebiusMap> seed(m);
    for (int i = 0; i < m - 3; ++i) {
        fixed[i] = partial[i];
        seed[i] = partial[i];
    }
    // generic hyperbolic seeds for the tail
    seed[m - 3] = MoebiusMap(2.1, 0.3, 0.7, 0.6);
    seed[m - 2] = MoebiusMap(1.7, 1.1, 0.4, 0.85);
    seed[m - 1] = MoebiusMap(3.0, 0.0, 0.0, 1.0 / 3.0);
    return solve_presentation_rep(pres, fixed, seed, m - 2, m - 1, opts, best_residual_out);
}

}  // namespace commensurate
