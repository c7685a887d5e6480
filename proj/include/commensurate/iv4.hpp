#pragma once

// Non-inner commensurability elements from finite quotients: pick a
// surjection of the surface group onto a finite group F, a non-normal
// subgroup P of F and a conjugating element alpha. Conjugation by any word
// mapping to alpha carries the preimage of P onto the preimage of
// alpha P alpha^-1, a different subgroup, which makes the element
// commensurating but not normalizing at this level.

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "commensurate/vaut.hpp"

namespace commensurate {

struct Perm {
    std::vector<int> map;  // images of 0..k-1

    Perm() = default;
    explicit Perm(std::vector<int> m) : map(std::move(m)) {}

    static Perm identity(int k) {
        std::vector<int> m(k);
        for (int i = 0; i < k; ++i) m[i] = i;
        return Perm(m);
    }

    int degree() const { return static_cast<int>(map.size()); }

    Perm operator*(const Perm& o) const {  // apply o first, then this
        std::vector<int> m(map.size());
        for (size_t i = 0; i < map.size(); ++i) m[i] = map[o.map[i]];
        return Perm(m);
    }

    Perm inverse() const {
        std::vector<int> m(map.size());
        for (size_t i = 0; i < map.size(); ++i) m[map[i]] = static_cast<int>(i);
        return Perm(m);
    }

    bool operator==(const Perm& o) const { return map == o.map; }
    bool operator<(const Perm& o) const { return map < o.map; }
};

// Cycle notation limited to what the CLI needs, e.g. "(0 1)(2 3)" on k points.
inline Perm parse_perm(const std::string& text, int k) {
    Perm p = Perm::identity(k);
    size_t i = 0;
    while (i < text.size()) {
        if (text[i] != '(') {
            ++i;
            continue;
        }
        ++i;
        std::vector<int> cyc;
        while (i < text.size() && text[i] != ')') {
            if (std::isdigit(static_cast<unsigned char>(text[i]))) {
                size_t start = i;
                while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
                cyc.push_back(std::stoi(text.substr(start, i - start)));
            } else {
                ++i;
            }
        }
        ++i;
        for (size_t j = 0; j < cyc.size(); ++j) {
            if (cyc[j] < 0 || cyc[j] >= k) throw InvariantError("parse_perm: point out of range");
            p.map[cyc[j]] = cyc[(j + 1) % cyc.size()];
        }
    }
    return p;
}

struct FinitePermGroup {
    int degree = 1;
    std::vector<Perm> elements;  // closed, element 0 is the identity
    std::string name;

    static FinitePermGroup closure(int degree, const std::vector<Perm>& gens, std::string name = "") {
        FinitePermGroup g;
        g.degree = degree;
        g.name = std::move(name);
        std::map<Perm, int> index;
        Perm id = Perm::identity(degree);
        index[id] = 0;
        g.elements.push_back(id);
        for (size_t head = 0; head < g.elements.size(); ++head) {
            for (const Perm& s : gens) {
                Perm prod = s * g.elements[head];
                if (!index.count(prod)) {
                    index[prod] = static_cast<int>(g.elements.size());
                    g.elements.push_back(prod);
                }
            }
        }
        return g;
    }

    static FinitePermGroup symmetric(int k) {
        std::vector<Perm> gens;
        std::vector<int> tr(k);
        for (int i = 0; i < k; ++i) tr[i] = i;
        std::swap(tr[0], tr[1]);
        gens.push_back(Perm(tr));
        std::vector<int> cyc(k);
        for (int i = 0; i < k; ++i) cyc[i] = (i + 1) % k;
        gens.push_back(Perm(cyc));
        return closure(k, gens, "S" + std::to_string(k));
    }

    int order() const { return static_cast<int>(elements.size()); }

    bool contains(const Perm& p) const {
        return std::find(elements.begin(), elements.end(), p) != elements.end();
    }
};

struct Iv4Certificate {
    CosetTable g_p;             // preimage of P
    CosetTable g_q;             // preimage of alpha P alpha^-1
    Word conjugating_word;      // w with phi(w) = alpha
    std::vector<Perm> phi;      // generator images in F
    bool normalizing = false;   // alpha centralizes P: degenerate branch
};

struct Iv4Result {
    VirtualAutomorphism vaut;
    Iv4Certificate certificate;
};

namespace detail {

// phi(x1 x2 ... xn) = m1 o m2 o ... o mn, so phi is a homomorphism for
// words read left to right with composition as the group law.
inline Perm eval_hom(const std::vector<Perm>& images, const Word& w, int degree) {
    Perm acc = Perm::identity(degree);
    for (Letter x : w.letters) {
        const Perm& m = images[(x > 0 ? x : -x) - 1];
        acc = acc * (x > 0 ? m : m.inverse());
    }
    return acc;
}

// First surjection G -> F in lexicographic order of generator images.
inline std::optional<std::vector<Perm>> find_surjection(const SurfaceGroupPresentation& p,
                                                        const FinitePermGroup& F) {
    int ng = p.num_generators();
    Word rel = p.relator();
    std::vector<int> choice(ng, 0);
    while (true) {
        std::vector<Perm> images;
        for (int k = 0; k < ng; ++k) images.push_back(F.elements[choice[k]]);
        if (eval_hom(images, rel, F.degree) == Perm::identity(F.degree)) {
            FinitePermGroup img = FinitePermGroup::closure(F.degree, images);
            if (img.order() == F.order()) return images;
        }
        int pos = ng - 1;
        while (pos >= 0 && ++choice[pos] == F.order()) choice[pos--] = 0;
        if (pos < 0) break;
    }
    return std::nullopt;
}

inline std::optional<Word> word_mapping_to(const SurfaceGroupPresentation& p,
                                           const std::vector<Perm>& phi, const Perm& target, int max_len) {
    for (const Word& w : enumerate_ball(p, max_len))
        if (eval_hom(phi, w, target.degree()) == target) return w;
    return std::nullopt;
}

// Coset table of phi^-1(P): the action of G on the right cosets of P in F.
inline CosetTable preimage_table(const SurfaceGroupPresentation& p, const FinitePermGroup& F,
                                 const FinitePermGroup& P, const std::vector<Perm>& phi) {
    std::vector<Perm> reps;
    std::vector<int> coset_of(F.order(), -1);
    auto find_elem = [&](const Perm& q) {
        for (int i = 0; i < F.order(); ++i)
            if (F.elements[i] == q) return i;
        throw InvariantError("iv4: element escaped the group");
    };
    for (int i = 0; i < F.order(); ++i) {
        if (coset_of[i] >= 0) continue;
        int c = static_cast<int>(reps.size());
        reps.push_back(F.elements[i]);
        for (const Perm& q : P.elements) coset_of[find_elem(q * F.elements[i])] = c;
    }
    // right coset P f; generator g sends it to P (f o phi(g))
    int n = static_cast<int>(reps.size());
    std::vector<std::vector<int>> fwd(p.num_generators(), std::vector<int>(n, -1));
    for (int c = 0; c < n; ++c) {
        for (int k = 1; k <= p.num_generators(); ++k) {
            Perm moved = reps[c] * phi[k - 1];
            fwd[k - 1][c] = coset_of[find_elem(moved)];
        }
    }
    return CosetTable::from_perms(p, fwd, 0);
}

}  // namespace detail

inline Iv4Result construct_iv4(const SurfaceGroupPresentation& p, const FinitePermGroup& F,
                               const std::vector<Perm>& p_gens, const Perm& alpha,
                               int word_search_len = 4) {
    FinitePermGroup P = FinitePermGroup::closure(F.degree, p_gens);
    for (const Perm& q : P.elements)
        if (!F.contains(q)) throw PreconditionError("iv4: P is not a subgroup of F");
    if (!F.contains(alpha)) throw PreconditionError("iv4: alpha is not in F");

    // P must be non-normal in F.
    bool normal_in_f = true;
    for (const Perm& f : F.elements) {
        for (const Perm& q : P.elements) {
            if (!P.contains(f * q * f.inverse())) {
                normal_in_f = false;
                break;
            }
        }
        if (!normal_in_f) break;
    }
    if (normal_in_f) throw PreconditionError("iv4: P is normal in F; construction degenerates");

    std::vector<Perm> q_gens;
    for (const Perm& q : p_gens) q_gens.push_back(alpha * q * alpha.inverse());
    FinitePermGroup Q = FinitePermGroup::closure(F.degree, q_gens);
    bool q_equals_p = P.order() == Q.order();
    if (q_equals_p)
        for (const Perm& q : Q.elements)
            if (!P.contains(q)) {
                q_equals_p = false;
                break;
            }

    auto phi = detail::find_surjection(p, F);
    if (!phi) throw ResourceCapError("iv4: no surjection onto the finite group found");
    auto w = detail::word_mapping_to(p, *phi, alpha, word_search_len);
    if (!w) throw ResourceCapError("iv4: no word mapping to alpha within the search budget");

    Iv4Certificate cert;
    cert.g_p = detail::preimage_table(p, F, P, *phi);
    cert.g_q = detail::preimage_table(p, F, Q, *phi);
    cert.conjugating_word = *w;
    cert.phi = *phi;
    cert.normalizing = q_equals_p;

    if (conjugate_table(cert.g_p, *w) != cert.g_q)
        throw InvariantError("iv4: conjugated preimage does not match the certificate");

    // The virtual automorphism of G_P: conjugation by w restricted to the
    // part of G_P it keeps inside G_P.
    CosetTable domain = intersect(cert.g_p, conjugate_table(cert.g_p, inverse(*w)));
    VirtualAutomorphism v = VirtualAutomorphism::from_conjugation(p, cert.g_p, domain, *w);
    v.verify();
    return Iv4Result{v, cert};
}

}  // namespace commensurate
