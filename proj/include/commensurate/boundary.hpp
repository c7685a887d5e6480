#pragma once

// Boundary circle maps of virtual automorphisms, sampled by fixed-point
// transport: a hyperbolic h in the domain pairs the attracting fixed point
// of rho(h) with that of rho(lambda(h)). Samples live on the unit circle of
// the disk model (fixed Cayley transform from the half-plane).

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "commensurate/teich.hpp"

namespace commensurate {

inline double wrap_angle(double a) {
    while (a <= -M_PI) a += 2 * M_PI;
    while (a > M_PI) a -= 2 * M_PI;
    return a;
}

// forward arc length from a to b, in [0, 2 pi)
inline double forward_arc(double a, double b) {
    double d = b - a;
    while (d < 0) d += 2 * M_PI;
    while (d >= 2 * M_PI) d -= 2 * M_PI;
    return d;
}

struct CircleMapSample {
    struct Pair {
        double source;  // angle in (-pi, pi]
        double target;
        Word word;      // the group element whose fixed point was transported
    };
    std::vector<Pair> pairs;  // sorted by source
    int orientation = +1;

    int size() const { return static_cast<int>(pairs.size()); }
};

struct BoundarySampleOptions {
    int schreier_budget = 3;  // products of domain Schreier generators
    int min_pairs = 8;
    // Pairs whose source angles collide at this scale are dropped (first
    // kept): a quasisymmetric map can spread tiny source gaps to visible
    // target gaps, so coincidence is not evidence of inconsistency.
    double dedup_tol = 1e-6;
};

namespace detail {

// circular monotonicity: exactly one wrap in the direction of travel
inline int check_monotone(std::vector<CircleMapSample::Pair>& pairs, double tol) {
    int n = static_cast<int>(pairs.size());
    int incr_wraps = 0, decr_wraps = 0;
    for (int i = 0; i < n; ++i) {
        double t0 = pairs[i].target, t1 = pairs[(i + 1) % n].target;
        double fwd = forward_arc(t0, t1);
        if (fwd < tol || fwd > 2 * M_PI - tol) return 0;  // coincident targets
        // increasing traversal wraps when the forward arc "laps"
    }
    // count order reversals for the increasing reading
    for (int i = 0; i < n; ++i) {
        double t0 = pairs[i].target, t1 = pairs[(i + 1) % n].target;
        if (t1 < t0) ++incr_wraps;
        if (t1 > t0) ++decr_wraps;
    }
    if (incr_wraps == 1) return +1;
    if (decr_wraps == 1) return -1;
    return 0;
}

}  // namespace detail

// Fixed-point transport sample of the boundary homeomorphism of v realized
// over the representation carried by `t` (whose stratum must contain the
// domain of v).
inline CircleMapSample sample_boundary(const VirtualAutomorphism& v, const TeichPoint& t,
                                       const BoundarySampleOptions& opts = {}) {
    if (!subgroup_contains(t.stratum.table, v.domain()))
        throw PreconditionError("sample_boundary: point does not restrict to the domain stratum");
    const SchreierData& dom_sd = v.domain_schreier();
    int m = dom_sd.num_sgens();

    std::vector<CircleMapSample::Pair> pairs;
    auto add_pair = [&](double src, double dst, const Word& h) {
        for (auto& pr : pairs) {
            if (std::abs(wrap_angle(pr.source - src)) < opts.dedup_tol) return;
        }
        pairs.push_back({src, dst, h});
    };

    // words over the domain Schreier alphabet, expanded to master words
    std::vector<Word> frontier = {Word{}};
    for (int len = 1; len <= opts.schreier_budget; ++len) {
        std::vector<Word> next;
        for (const Word& w : frontier) {
            for (int k = 1; k <= m; ++k) {
                for (Letter x : {Letter(k), Letter(-k)}) {
                    if (!w.letters.empty() && w.letters.back() == -x) continue;
                    Word e = w;
                    e.letters.push_back(x);
                    next.push_back(e);
                    Word h = schreier_expand(dom_sd, e);
                    if (h.empty()) continue;
                    MoebiusMap mh = t.eval_word(h);
                    if (!mh.is_hyperbolic()) continue;
                    Word lh = v.apply(h);
                    MoebiusMap ml = t.eval_word(lh);
                    if (!ml.is_hyperbolic()) continue;
                    double src = boundary_angle(hyperbolic_fixed_points(mh).attracting);
                    double dst = boundary_angle(hyperbolic_fixed_points(ml).attracting);
                    add_pair(src, dst, h);
                }
            }
        }
        frontier = std::move(next);
    }

    if (static_cast<int>(pairs.size()) < opts.min_pairs)
        throw NumericError("sample_boundary: insufficient sample (" + std::to_string(pairs.size()) +
                           " pairs)");
    std::sort(pairs.begin(), pairs.end(),
              [](const auto& a, const auto& b) { return a.source < b.source; });
    int orient = detail::check_monotone(pairs, 1e-12);
    if (orient == 0) throw NumericError("sample_boundary: target angles are not circularly monotone");
    CircleMapSample s;
    s.pairs = std::move(pairs);
    s.orientation = orient;
    return s;
}

inline int orientation(const CircleMapSample& s) { return s.orientation; }

// piecewise-linear circular interpolation of the sampled map
inline double interpolate(const CircleMapSample& s, double x) {
    int n = s.size();
    if (n < 2) throw PreconditionError("interpolate: need at least two pairs");
    // locate bracketing source pair (circular)
    int lo = -1;
    for (int i = 0; i < n; ++i) {
        double a = s.pairs[i].source;
        double b = s.pairs[(i + 1) % n].source;
        double span = forward_arc(a, b);
        double off = forward_arc(a, x);
        if (off <= span + 1e-15) {
            lo = i;
            break;
        }
    }
    if (lo < 0) lo = n - 1;
    const auto& p0 = s.pairs[lo];
    const auto& p1 = s.pairs[(lo + 1) % n];
    double span = forward_arc(p0.source, p1.source);
    double frac = span < 1e-15 ? 0.0 : forward_arc(p0.source, x) / span;
    double tspan = s.orientation > 0 ? forward_arc(p0.target, p1.target)
                                     : -forward_arc(p1.target, p0.target);
    return wrap_angle(p0.target + frac * tspan);
}

// max over sampled symmetric triples of the arc-ratio, symmetrized to >= 1
inline double quasisymmetry_ratio(const CircleMapSample& s) {
    if (s.size() < 3) throw PreconditionError("quasisymmetry_ratio: insufficient sample");
    double worst = 1.0;
    for (const auto& pr : s.pairs) {
        for (double t = M_PI / 2; t > M_PI / 64; t /= 2) {
            double f0 = interpolate(s, wrap_angle(pr.source - t));
            double f1 = pr.target;
            double f2 = interpolate(s, wrap_angle(pr.source + t));
            double num, den;
            if (s.orientation > 0) {
                num = forward_arc(f1, f2);
                den = forward_arc(f0, f1);
            } else {
                num = forward_arc(f2, f1);
                den = forward_arc(f1, f0);
            }
            if (num < 1e-12 || den < 1e-12) continue;
            double r = num / den;
            worst = std::max(worst, std::max(r, 1 / r));
        }
    }
    return worst;
}

struct MoebiusFit {
    MoebiusMap map;        // half-plane form of the fitted disk automorphism
    DiskMap disk;
    double residual = 0;   // max angular deviation over the sample
};

namespace detail {

// exact disk automorphism through three boundary pairs, via the half-plane
// cross-ratio maps
inline std::optional<DiskMap> three_pair_fit(const CircleMapSample& s, int i0, int i1, int i2) {
    auto to_boundary = [](double angle) {
        // Cayley inverse on the boundary: e^{i theta} -> -cot(theta/2)
        double t = std::tan(angle / 2);
        if (std::abs(t) < 1e-14) return kBoundaryInfinity;
        return -1.0 / t;
    };
    try {
        MoebiusMap src = three_point_map(to_boundary(s.pairs[i0].source), to_boundary(s.pairs[i1].source),
                                         to_boundary(s.pairs[i2].source));
        MoebiusMap dst = three_point_map(to_boundary(s.pairs[i0].target), to_boundary(s.pairs[i1].target),
                                         to_boundary(s.pairs[i2].target));
        return to_disk(dst.inverse() * src);
    } catch (const NumericError&) {
        return std::nullopt;
    }
}

}  // namespace detail

// Least-squares disk automorphism z -> e^{i psi} (z - a)/(1 - conj(a) z),
// seeded from exact three-pair solutions and polished with LM.
inline MoebiusFit moebius_fit(const CircleMapSample& s) {
    if (s.size() < 3) throw PreconditionError("moebius_fit: insufficient sample");
    auto model = [&](const std::vector<double>& x) {
        double psi = x[0];
        Complex u(x[1], x[2]);
        Complex a = u / std::sqrt(1.0 + std::norm(u));  // open unit disk
        DiskMap m = DiskMap::rotation(psi) * DiskMap::to_origin(a);
        return m;
    };
    ResidualFn f = [&](const std::vector<double>& x) {
        DiskMap m = model(x);
        std::vector<double> r;
        for (const auto& pr : s.pairs) {
            double pred = std::arg(m.apply(std::polar(1.0, pr.source)));
            r.push_back(wrap_angle(pred - pr.target));
        }
        return r;
    };
    auto params_of = [](const DiskMap& m) {
        Complex alpha = -m.b / m.a;
        double cap = std::min(std::abs(alpha), 1.0 - 1e-12);
        alpha = std::abs(alpha) > 0 ? alpha / std::abs(alpha) * cap : alpha;
        Complex u = alpha / std::sqrt(1.0 - std::norm(alpha));
        return std::vector<double>{std::arg(m.a * m.a), u.real(), u.imag()};
    };
    auto eval_worst = [&](const DiskMap& m) {
        double worst = 0;
        for (const auto& pr : s.pairs)
            worst = std::max(
                worst, std::abs(wrap_angle(std::arg(m.apply(std::polar(1.0, pr.source))) - pr.target)));
        return worst;
    };

    std::vector<std::vector<double>> starts;
    {  // mean rotation
        double c = 0, sn = 0;
        for (const auto& pr : s.pairs) {
            c += std::cos(pr.target - pr.source);
            sn += std::sin(pr.target - pr.source);
        }
        starts.push_back({std::atan2(sn, c), 0.0, 0.0});
    }
    int n = s.size();
    for (int k = 0; k < 5; ++k) {
        int i0 = (k * 7) % n, i1 = (i0 + n / 3) % n, i2 = (i0 + (2 * n) / 3) % n;
        if (i0 == i1 || i1 == i2 || i0 == i2) continue;
        auto exact = detail::three_pair_fit(s, i0, i1, i2);
        if (exact) starts.push_back(params_of(*exact));
    }

    LMOptions lm;
    lm.max_iter = 400;
    double best_worst = 1e100;
    DiskMap best;
    for (const auto& x0 : starts) {
        double cost = 0;
        std::vector<double> sol = levenberg_marquardt(f, x0, lm, &cost);
        DiskMap dm = model(sol);
        double w = eval_worst(dm);
        if (w < best_worst) {
            best_worst = w;
            best = dm;
        }
    }
    MoebiusFit fit;
    fit.disk = best;
    fit.map = to_half_plane(best);
    fit.residual = best_worst;
    return fit;
}

}  // namespace commensurate
