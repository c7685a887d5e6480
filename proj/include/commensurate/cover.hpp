#pragma once

// Pointed covers of the base surface, factorization, fiber products, and
// covering cycles. A pointed cover is the canonical model of its subgroup:
// the coset table with the marked fiber point at coset 0. Re-pointing the
// same table at another coset gives the cover with a shifted base point.

#include <optional>
#include <string>
#include <vector>

#include "commensurate/schreier.hpp"

namespace commensurate {

struct PointedCover {
    CosetTable table;
    std::string label;

    PointedCover() = default;
    explicit PointedCover(CosetTable t, std::string lbl = "") : table(std::move(t)), label(std::move(lbl)) {}

    int degree() const { return table.degree(); }

    bool operator==(const PointedCover& o) const { return table == o.table; }
    bool operator<(const PointedCover& o) const { return table < o.table; }
};

// Directed-set maps between pointed covers and subgroups. A extracts the
// stabilizer of the marked point; B builds the canonical pointed cover.
// A(B(H)) = H, and B(A(p)) is the canonical model of p.
inline CosetTable map_A(const PointedCover& p) { return p.table.canonical(0); }
inline PointedCover map_B(const CosetTable& h) { return PointedCover(h.canonical(0)); }

// Unique pointed factor map q -> p when Stab_q(0) <= Stab_p(0): the
// equivariant surjection of q's cosets onto p's cosets with 0 -> 0.
inline std::optional<std::vector<int>> factor(const PointedCover& q, const PointedCover& p) {
    if (q.table.presentation() != p.table.presentation())
        throw PreconditionError("factor: presentations differ");
    std::vector<int> m(q.degree(), -1);
    m[0] = 0;
    std::vector<int> stack = {0};
    int ng = q.table.presentation().num_generators();
    while (!stack.empty()) {
        int c = stack.back();
        stack.pop_back();
        for (int k = 1; k <= ng; ++k) {
            for (Letter x : {Letter(k), Letter(-k)}) {
                int d = q.table.apply(c, x);
                int img = p.table.apply(m[c], x);
                if (m[d] == -1) {
                    m[d] = img;
                    stack.push_back(d);
                } else if (m[d] != img) {
                    return std::nullopt;
                }
            }
        }
    }
    return m;
}

// Connected pointed component of the product action through (0,0); the cover
// of Stab_p(0) cap Stab_q(0). Both projections exist as factor maps.
inline PointedCover fiber_product(const PointedCover& p, const PointedCover& q) {
    return PointedCover(intersect(p.table, q.table));
}

// One up-then-down pass of a covering cycle through a single cover: climb to
// the cover pointed at coset `up`, come back down pointed at coset `down`.
// The pass induces the virtual automorphism Stab(up) -> Stab(down) given by
// conjugation with rep(down)^-1 rep(up).
struct CyclePass {
    CosetTable table;
    int up = 0;
    int down = 0;
};

struct CoveringCycle {
    std::vector<CyclePass> passes;

    bool well_formed() const {
        if (passes.empty()) return false;
        for (const auto& ps : passes) {
            if (ps.up < 0 || ps.up >= ps.table.degree()) return false;
            if (ps.down < 0 || ps.down >= ps.table.degree()) return false;
        }
        return true;
    }
};

// Second-arrow data over a common cover: the monomorphism images of the
// cover subgroup's Schreier generators under the second projection. When
// the second arrow is conjugation by a word of the master group, the
// conjugator is carried along so the inverse comes for free.
struct TwoArrowDiagram {
    CosetTable cover;                    // subgroup H of the first arrow
    std::vector<Word> second_images;     // images of H's Schreier generators
    CosetTable ambient;                  // the base group the diagram lives over
    std::optional<Word> conjugator;      // w with second arrow = C_w, when known

    TwoArrowDiagram() = default;
};

inline TwoArrowDiagram identity_diagram(const CosetTable& cover_table, const CosetTable& ambient) {
    TwoArrowDiagram d;
    d.cover = cover_table;
    SchreierData sd = schreier_data(cover_table);
    d.second_images = sd.sgens;
    d.ambient = ambient;
    d.conjugator = Word{};
    return d;
}

// Diagram of a single pass: both arrows from the canonically re-pointed
// cover; the second arrow is conjugation by t = rep(down)^-1 rep(up).
inline TwoArrowDiagram pass_diagram(const CyclePass& ps, const CosetTable& ambient) {
    SchreierData sd = schreier_data(ps.table);
    Word t = multiply(inverse(sd.reps[ps.down]), sd.reps[ps.up]);
    CosetTable up_side = ps.table.canonical(ps.up);
    SchreierData up_sd = schreier_data(up_side);
    TwoArrowDiagram d;
    d.cover = up_side;
    d.ambient = ambient;
    d.conjugator = t;
    for (const Word& s : up_sd.sgens) d.second_images.push_back(conjugate(t, s));
    return d;
}

}  // namespace commensurate
