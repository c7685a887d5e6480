#pragma once

// Truncated solenoid machinery over the chain A_n = intersection of all
// subgroups of index <= n. Level membership is decided subgroup by subgroup
// (no combined table needed), so ord and the profinite metric stay cheap at
// depths where the full intersection table would be astronomical. Combined
// tables are materialized only for small depths where other operations need
// the finite quotient explicitly.

#include <array>
#include <optional>
#include <set>
#include <vector>

#include "commensurate/boundary.hpp"
#include "commensurate/teich.hpp"
#include "commensurate/todd_coxeter.hpp"

namespace commensurate {

class LevelSpec {
public:
    LevelSpec() = default;

    // A_n chain to the given depth; combined coset tables are built for
    // levels up to table_depth (their index grows fast).
    static LevelSpec a_chain(const SurfaceGroupPresentation& p, int depth, int table_depth = 2,
                             const EnumLimits& limits = {}) {
        LevelSpec ls;
        ls.pres_ = p;
        ls.depth_ = depth;
        ls.subgroups_ = enumerate_subgroups(p, depth, limits);
        ls.combined_.resize(depth);
        for (int k = 1; k <= std::min(depth, table_depth); ++k) {
            CosetTable acc = CosetTable::whole_group(p);
            for (const auto& t : ls.subgroups_)
                if (t.degree() <= k) acc = intersect(acc, t);
            ls.combined_[k - 1] = acc;
        }
        return ls;
    }

    const SurfaceGroupPresentation& presentation() const { return pres_; }
    int depth() const { return depth_; }

    // w in A_k
    bool in_level(const Word& w, int k) const {
        for (const auto& t : subgroups_) {
            if (t.degree() > k) continue;
            if (!t.membership(w)) return false;
        }
        return true;
    }

    const std::optional<CosetTable>& combined_table(int k) const {
        static const std::optional<CosetTable> none;
        if (k < 1 || k > depth_) return none;
        return combined_[k - 1];
    }

    long long quotient_order(int k) const {
        auto& t = combined_table(k);
        if (!t) throw ResourceCapError("level: combined table not materialized at this depth");
        return t->degree();
    }

private:
    SurfaceGroupPresentation pres_{2};
    int depth_ = 0;
    std::vector<CosetTable> subgroups_;
    std::vector<std::optional<CosetTable>> combined_;
};

// ord(w) = max n <= depth with w in A_n; the truncation cannot certify more
// than the configured depth, so membership in A_depth is reported as a
// distinct at-level infinity.
struct OrdResult {
    bool infinity_at_level = false;
    int value = 0;
    int depth = 0;
};

inline OrdResult ord(const Word& w, const LevelSpec& level) {
    OrdResult r;
    r.depth = level.depth();
    if (level.in_level(w, level.depth())) {
        r.infinity_at_level = true;
        r.value = level.depth();
        return r;
    }
    int best = 0;
    for (int k = 1; k <= level.depth(); ++k) {
        if (level.in_level(w, k))
            best = k;
        else
            break;
    }
    r.value = best;
    return r;
}

// d(u, v) = exp(-ord(u^-1 v)); zero when ord is infinite at this depth.
inline double profinite_distance(const Word& u, const Word& v, const LevelSpec& level) {
    OrdResult r = ord(multiply(inverse(u), v), level);
    if (r.infinity_at_level) return 0.0;
    return std::exp(-static_cast<double>(r.value));
}

// Compatible string of coset representatives, one per level 1..depth.
struct TruncatedProfiniteElement {
    std::vector<Word> reps;

    int depth() const { return static_cast<int>(reps.size()); }

    static TruncatedProfiniteElement constant(const Word& g, int depth) {
        TruncatedProfiniteElement e;
        e.reps.assign(depth, g);
        return e;
    }

    void check_compatible(const LevelSpec& level) const {
        if (depth() != level.depth()) throw InvariantError("profinite element: depth mismatch");
        for (int k = 1; k < depth(); ++k) {
            // deeper rep must map to the shallower coset: rep_k A_k = rep_{k+1} A_k
            if (!level.in_level(multiply(inverse(reps[k - 1]), reps[k]), k))
                throw InvariantError("profinite element: incompatible adjacent levels");
        }
    }
};

struct SolenoidPoint {
    Complex z;  // disk model, inside the closed fundamental polygon
    TruncatedProfiniteElement fiber;
};

inline SolenoidPoint solenoid_base_point(int depth) {
    return SolenoidPoint{FundamentalPolygon::basepoint(), TruncatedProfiniteElement::constant(Word{}, depth)};
}

struct BaseLeafResult {
    bool found = false;        // NONE_AT_BUDGET when false; never certifies "off the leaf"
    Word witness;
    int budget = 0;
};

// Search for a single short word representing every level's coset.
inline BaseLeafResult base_leaf_test(const SolenoidPoint& p, const LevelSpec& level, int budget) {
    p.fiber.check_compatible(level);
    BaseLeafResult res;
    res.budget = budget;
    for (const Word& g : enumerate_ball(level.presentation(), budget)) {
        bool all = true;
        for (int k = 1; k <= level.depth(); ++k) {
            if (!level.in_level(multiply(inverse(p.fiber.reps[k - 1]), g), k)) {
                all = false;
                break;
            }
        }
        if (all) {
            res.found = true;
            res.witness = g;
            return res;
        }
    }
    return res;
}

// --- level transport (Q_H) ---------------------------------------------------

struct QHLevelReport {
    int orbit_size = 0;           // |H N / N| inside G/N
    int index_h_cap_n_in_h = 0;   // [H : H cap N]
    bool counting_bijective = false;
    bool h_cap_g_equals_h = false;  // truncated "H-hat cap G = H" on the sampled ball
    int ball_checked = 0;
};

// Verifies the finite-level content of the base-leaf biholomorphism between
// the H-solenoid and the G-solenoid: the coset-space comparison is a
// bijection by counting, and membership in H N (the level image of H-hat)
// agrees with membership in H on the sampled ball.
inline QHLevelReport qh_level_check(const CosetTable& h, const CosetTable& level_n, int ball_len) {
    const SurfaceGroupPresentation& p = h.presentation();
    QHLevelReport rep;
    // orbit of the base coset of N under right multiplication by H
    SchreierData h_sd = schreier_data(h);
    std::vector<bool> seen(level_n.degree(), false);
    std::vector<int> stack = {0};
    seen[0] = true;
    int orbit = 1;
    while (!stack.empty()) {
        int c = stack.back();
        stack.pop_back();
        for (const Word& s : h_sd.sgens) {
            for (const Word& w : {s, inverse(s)}) {
                int d = level_n.trace(c, w);
                if (!seen[d]) {
                    seen[d] = true;
                    ++orbit;
                    stack.push_back(d);
                }
            }
        }
    }
    rep.orbit_size = orbit;
    CosetTable meet = intersect(h, level_n);
    rep.index_h_cap_n_in_h = meet.degree() / h.degree();
    rep.counting_bijective = (rep.orbit_size == rep.index_h_cap_n_in_h);

    rep.h_cap_g_equals_h = true;
    for (const Word& g : enumerate_ball(p, ball_len)) {
        ++rep.ball_checked;
        bool in_hn = seen[level_n.trace(0, g)];
        bool in_h = h.membership(g);
        if (in_hn != in_h) {
            rep.h_cap_g_equals_h = false;
            break;
        }
    }
    return rep;
}

// Transport a point over H-levels to the G-solenoid. The H-level subgroups
// must refine the G-levels (containment checked); representatives carry over
// unchanged and base-leaf points stay base-leaf.
inline SolenoidPoint level_map_qh(const SolenoidPoint& p, const std::vector<CosetTable>& h_levels,
                                  const LevelSpec& g_levels) {
    if (static_cast<int>(h_levels.size()) != g_levels.depth() || p.fiber.depth() != g_levels.depth())
        throw PreconditionError("level_map_qh: depth mismatch");
    for (int k = 1; k <= g_levels.depth(); ++k) {
        SchreierData sd = schreier_data(h_levels[k - 1]);
        for (const Word& s : sd.sgens)
            if (!g_levels.in_level(s, k))
                throw PreconditionError("level_map_qh: H-level does not refine the G-level " +
                                        std::to_string(k));
    }
    SolenoidPoint out = p;
    out.fiber.check_compatible(g_levels);
    return out;
}

// --- the extension formula ----------------------------------------------------

// Extend a Moebius map realizing a virtual automorphism to the truncated
// solenoid: the plane coordinate moves by gamma and folds back into the
// polygon; the fiber coordinates transform by the isomorphism, corrected by
// the folding word.
inline SolenoidPoint extend_to_solenoid(const MoebiusMap& gamma, const VirtualAutomorphism& v,
                                        const SolenoidPoint& p, const FundamentalPolygon& poly,
                                        const LevelSpec& level) {
    if (!realizes(gamma, v, poly.rep))
        throw PreconditionError("extend_to_solenoid: map does not realize the virtual automorphism");
    p.fiber.check_compatible(level);
    for (const Word& w : p.fiber.reps)
        if (!v.domain().membership(w))
            throw PreconditionError("extend_to_solenoid: fiber representative outside the domain level");
    Complex moved = to_disk(gamma).apply(p.z);
    FundamentalPolygon::Reduction red = poly.reduce(moved);
    SolenoidPoint out;
    out.z = red.point;
    out.fiber.reps.reserve(p.fiber.depth());
    for (const Word& w : p.fiber.reps) out.fiber.reps.push_back(multiply(red.word, v.apply(w)));
    out.fiber.check_compatible(level);
    return out;
}

// --- measures -------------------------------------------------------------------

struct Region {
    enum class Kind { FULL, DISK, HALF_CUT };
    Kind kind = Kind::FULL;
    Complex center{0, 0};
    double radius = 0;
    double cut_x = 0;  // keep Re z >= cut_x

    bool inside(Complex z) const {
        switch (kind) {
            case Kind::FULL: return true;
            case Kind::DISK: return std::abs(z - center) <= radius;
            case Kind::HALF_CUT: return z.real() >= cut_x;
        }
        return false;
    }

    static Region full() { return Region{}; }
    static Region disk(Complex c, double r) { return Region{Kind::DISK, c, r, 0}; }
    static Region half(double x) { return Region{Kind::HALF_CUT, Complex(0, 0), 0, x}; }
};

struct MeasureEstimate {
    double value = 0;   // hyperbolic area x fiber fraction
    double se = 0;      // Monte Carlo standard error (same units)
    long samples = 0;
};

// Monte Carlo hyperbolic area of (an optional Moebius translate of)
// region cap polygon, times the Haar mass of the fiber cylinder (uniform on
// the finite level quotient). Samples are drawn hyperbolically uniformly
// from a geodesic ball covering the target set, so the integrand is a plain
// indicator and the variance stays bounded.
inline MeasureEstimate measure_report(const FundamentalPolygon& poly, const Region& region,
                                      double cylinder_fraction, long samples, std::uint64_t seed,
                                      const MoebiusMap* translate = nullptr) {
    DiskMap shift = translate ? to_disk(*translate) : DiskMap::identity();
    DiskMap unshift = shift.inverse();
    double r_hyp = 0;
    for (const auto& vtx : poly.vertices)
        r_hyp = std::max(r_hyp, disk_distance(Complex(0, 0), shift.apply(vtx)));
    r_hyp += 1e-6;
    double ball_area = 2 * M_PI * (std::cosh(r_hyp) - 1);

    auto rng = seeded_rng(seed, 0xA3EA);
    std::uniform_real_distribution<double> uu(0.0, 1.0);
    long hits = 0;
    for (long i = 0; i < samples; ++i) {
        double rh = std::acosh(1 + uu(rng) * (std::cosh(r_hyp) - 1));
        double th = 2 * M_PI * uu(rng);
        Complex z = std::polar(std::tanh(rh / 2), th);
        Complex zz = translate ? unshift.apply(z) : z;
        if (poly.contains(zz) && region.inside(zz)) ++hits;
    }
    double frac = static_cast<double>(hits) / samples;
    MeasureEstimate est;
    est.value = ball_area * frac * cylinder_fraction;
    est.se = ball_area * std::sqrt(std::max(frac * (1 - frac), 1e-12) / samples) * cylinder_fraction;
    est.samples = samples;
    return est;
}

// Pushforward consistency for a cover: the preimage of the region is the
// union of the coset translates, whose measures must sum to degree x base.
struct PushforwardCheck {
    double base_value = 0, base_se = 0;
    double cover_value = 0, cover_se = 0;  // linear-sum bound over the translate estimates
    int degree = 1;
    // Conservative: the combined SE adds linearly, so a pass certifies the
    // law within k true standard errors with margin to spare.
    bool within(double k_se) const {
        double diff = std::abs(cover_value - degree * base_value);
        double se = cover_se + degree * base_se;
        return diff <= k_se * std::max(se, 1e-12);
    }
};

inline PushforwardCheck cover_pushforward_check(const FundamentalPolygon& poly, const CosetTable& cover,
                                                const Region& region, long samples, std::uint64_t seed) {
    PushforwardCheck chk;
    chk.degree = cover.degree();
    MeasureEstimate base = measure_report(poly, region, 1.0, samples, seed);
    chk.base_value = base.value;
    chk.base_se = base.se;
    SchreierData sd = schreier_data(cover);
    double total = 0, se_sum = 0;
    for (int c = 0; c < cover.degree(); ++c) {
        MoebiusMap t = poly.rep.eval(sd.reps[c]);
        MeasureEstimate part = measure_report(poly, region, 1.0, samples, seed + 17 * (c + 1), &t);
        total += part.value;
        se_sum += part.se;
    }
    chk.cover_value = total;
    chk.cover_se = se_sum;
    return chk;
}

// --- density probe ----------------------------------------------------------------

struct DensityProbeOptions {
    double ball_radius = 0.45;  // parameter box half-width around the identity
    int grid = 7;               // net points per axis
    double eps = 0.15;
    double prune_norm = 25.0;   // drop products beyond this Frobenius norm
    long max_products = 2000000;
};

struct DensityProbeResult {
    int length = 0;
    double coverage = 0;
    long products = 0;
    long net_points = 0;
};

// Fraction of an eps-net of a compact identity neighborhood lying within eps
// of some product of the sample generators of length <= L. Dense subgroups
// drive coverage up with L; discrete ones plateau once the ball's elements
// are exhausted.
inline DensityProbeResult density_probe(const std::vector<MoebiusMap>& gens, int length,
                                        const DensityProbeOptions& opts = {}) {
    std::vector<MoebiusMap> alphabet;
    for (const auto& g : gens) {
        alphabet.push_back(g);
        alphabet.push_back(g.inverse());
    }
    auto key_of = [](const MoebiusMap& m) {
        double s = (std::abs(m.a) > 1e-9 ? (m.a > 0 ? 1 : -1)
                    : std::abs(m.b) > 1e-9 ? (m.b > 0 ? 1 : -1)
                    : std::abs(m.c) > 1e-9 ? (m.c > 0 ? 1 : -1)
                                           : (m.d > 0 ? 1 : -1));
        auto q = [s](double v) { return static_cast<long long>(std::llround(s * v * 1e7)); };
        return std::array<long long, 4>{q(m.a), q(m.b), q(m.c), q(m.d)};
    };
    std::set<std::array<long long, 4>> seen;
    std::vector<MoebiusMap> all = {MoebiusMap::identity()};
    seen.insert(key_of(all[0]));
    std::vector<MoebiusMap> frontier = all;
    for (int len = 1; len <= length; ++len) {
        std::vector<MoebiusMap> next;
        for (const auto& m : frontier) {
            for (const auto& g : alphabet) {
                MoebiusMap prod = m * g;
                double norm = std::sqrt(prod.a * prod.a + prod.b * prod.b + prod.c * prod.c +
                                        prod.d * prod.d);
                if (norm > opts.prune_norm) continue;
                auto key = key_of(prod);
                if (seen.count(key)) continue;
                seen.insert(key);
                next.push_back(prod);
                all.push_back(prod);
                if (static_cast<long>(all.size()) > opts.max_products)
                    throw ResourceCapError("density_probe: product cap exceeded");
            }
        }
        frontier = std::move(next);
    }

    DensityProbeResult res;
    res.length = length;
    res.products = static_cast<long>(all.size());
    long hits = 0, total = 0;
    for (int ia = 0; ia < opts.grid; ++ia) {
        for (int ib = 0; ib < opts.grid; ++ib) {
            for (int ic = 0; ic < opts.grid; ++ic) {
                auto coord = [&](int i) {
                    return opts.grid == 1 ? 0.0
                                          : -opts.ball_radius + 2 * opts.ball_radius * i / (opts.grid - 1);
                };
                double a = coord(ia), b = coord(ib), c = coord(ic);
                double da = 1 + a;
                double dd = (1 + b * c) / da;
                MoebiusMap target;
                try {
                    target = MoebiusMap(da, b, c, dd);
                } catch (const NumericError&) {
                    continue;
                }
                ++total;
                for (const auto& m : all) {
                    if (m.dist(target) <= opts.eps) {
                        ++hits;
                        break;
                    }
                }
            }
        }
    }
    res.net_points = total;
    res.coverage = total > 0 ? static_cast<double>(hits) / total : 0.0;
    return res;
}

// The classical arithmetic exemplar: the modular group with Hecke
// conjugators at p = 2, 3. Neither co-compact nor torsion-free; probe output
// is illustrative only.
inline std::vector<MoebiusMap> arithmetic_sample_generators() {
    std::vector<MoebiusMap> gens;
    gens.push_back(MoebiusMap(0, -1, 1, 0));   // S
    gens.push_back(MoebiusMap(1, 1, 0, 1));    // T
    gens.push_back(MoebiusMap(std::sqrt(2.0), 0, 0, 1 / std::sqrt(2.0)));
    gens.push_back(MoebiusMap(std::sqrt(3.0), 0, 0, 1 / std::sqrt(3.0)));
    return gens;
}

}  // namespace commensurate
