#pragma once

// Virtual automorphisms: verified isomorphisms between finite-index
// subgroups, taken up to agreement on a smaller finite-index subgroup.
//
// Every value stores both directions (images of the domain's Schreier
// generators and inverse images of the codomain's), so isomorphism is
// certified exactly: the relators die and the two directions compose to the
// identity on generators. Elements arising from conjugation inside a larger
// group carry the conjugating word, which keeps composition and inversion
// closed-form.
//
// The `ambient` table names the group the element is a virtual automorphism
// of. Working relative to a finite-index ambient subgroup is what makes
// conjugation by a word outside the ambient group a non-inner element.

#include <optional>
#include <vector>

#include "commensurate/cover.hpp"
#include "commensurate/todd_coxeter.hpp"

namespace commensurate {

struct VautOptions {
    int inverse_search_len = 4;  // fallback search depth over Schreier letters
    int tc_max_cosets = 200000;
};

// Table of w H w^-1 from the table of H: the same action re-based at 0.w^-1.
inline CosetTable conjugate_table(const CosetTable& t, const Word& w) {
    return t.canonical(t.trace(0, inverse(w)));
}

class VirtualAutomorphism {
public:
    VirtualAutomorphism() = default;

    const SurfaceGroupPresentation& presentation() const { return pres_; }
    const CosetTable& ambient() const { return ambient_; }
    const CosetTable& domain() const { return domain_; }
    const CosetTable& codomain() const { return codomain_; }
    const std::vector<Word>& images() const { return images_; }
    const std::vector<Word>& inverse_images() const { return inverse_images_; }
    const std::optional<Word>& conjugator() const { return conjugator_; }
    int orientation() const { return orientation_; }
    void set_orientation(int o) { orientation_ = o; }

    const SchreierData& domain_schreier() const { return dom_sd_; }
    const SchreierData& codomain_schreier() const { return cod_sd_; }

    Word apply(const Word& w) const {
        Word sw = schreier_rewrite(dom_sd_, w);
        Word out;
        for (Letter x : sw.letters) {
            int k = x > 0 ? x : -x;
            out = multiply(out, x > 0 ? images_[k - 1] : inverse(images_[k - 1]));
        }
        return out;
    }

    Word apply_inverse(const Word& w) const {
        Word sw = schreier_rewrite(cod_sd_, w);
        Word out;
        for (Letter x : sw.letters) {
            int k = x > 0 ? x : -x;
            out = multiply(out, x > 0 ? inverse_images_[k - 1] : inverse(inverse_images_[k - 1]));
        }
        return out;
    }

    // Exact certification: images land in the codomain, relators die, and the
    // two directions are mutually inverse on generators.
    void verify() const {
        if (static_cast<int>(images_.size()) != dom_sd_.num_sgens())
            throw InvariantError("vaut: image count mismatch");
        if (static_cast<int>(inverse_images_.size()) != cod_sd_.num_sgens())
            throw InvariantError("vaut: inverse image count mismatch");
        if (!subgroup_contains(ambient_, domain_) || !subgroup_contains(ambient_, codomain_))
            throw InvariantError("vaut: domain or codomain leaves the ambient group");
        for (const Word& im : images_)
            if (!codomain_.membership(im)) throw InvariantError("vaut: image outside codomain");
        for (const Word& im : inverse_images_)
            if (!domain_.membership(im)) throw InvariantError("vaut: inverse image outside domain");
        SchreierPresentation sp = schreier_presentation(domain_);
        for (const Word& rel : sp.relators) {
            Word im;
            for (Letter x : rel.letters) {
                int k = x > 0 ? x : -x;
                im = multiply(im, x > 0 ? images_[k - 1] : inverse(images_[k - 1]));
            }
            if (!is_identity(im, pres_)) throw InvariantError("vaut: relator not killed");
        }
        for (int i = 0; i < dom_sd_.num_sgens(); ++i) {
            Word back = apply_inverse(images_[i]);
            if (!words_equal_in_group(back, dom_sd_.sgens[i], pres_))
                throw InvariantError("vaut: inverse does not undo the map");
        }
        for (int i = 0; i < cod_sd_.num_sgens(); ++i) {
            Word fwd = apply(inverse_images_[i]);
            if (!words_equal_in_group(fwd, cod_sd_.sgens[i], pres_))
                throw InvariantError("vaut: map does not undo the inverse");
        }
    }

    static VirtualAutomorphism from_conjugation(const SurfaceGroupPresentation& p, const CosetTable& ambient,
                                                const CosetTable& domain, const Word& w) {
        VirtualAutomorphism v;
        v.pres_ = p;
        v.ambient_ = ambient;
        v.domain_ = domain;
        v.codomain_ = conjugate_table(domain, w);
        v.dom_sd_ = schreier_data(v.domain_);
        v.cod_sd_ = schreier_data(v.codomain_);
        for (const Word& s : v.dom_sd_.sgens) v.images_.push_back(conjugate(w, s));
        Word wi = inverse(w);
        for (const Word& s : v.cod_sd_.sgens) v.inverse_images_.push_back(conjugate(wi, s));
        v.conjugator_ = w;
        return v;
    }

    static VirtualAutomorphism from_parts(const SurfaceGroupPresentation& p, const CosetTable& ambient,
                                          const CosetTable& domain, const CosetTable& codomain,
                                          std::vector<Word> images, std::vector<Word> inverse_images,
                                          std::optional<Word> conj = std::nullopt) {
        VirtualAutomorphism v;
        v.pres_ = p;
        v.ambient_ = ambient;
        v.domain_ = domain;
        v.codomain_ = codomain;
        v.dom_sd_ = schreier_data(domain);
        v.cod_sd_ = schreier_data(codomain);
        v.images_ = std::move(images);
        v.inverse_images_ = std::move(inverse_images);
        v.conjugator_ = std::move(conj);
        return v;
    }

private:
    SurfaceGroupPresentation pres_{2};
    CosetTable ambient_;
    CosetTable domain_, codomain_;
    std::vector<Word> images_, inverse_images_;
    std::optional<Word> conjugator_;
    int orientation_ = +1;
    SchreierData dom_sd_, cod_sd_;
};

// x -> g x g^-1 on the whole ambient group.
inline VirtualAutomorphism inner(const Word& g, const CosetTable& ambient,
                                 const SurfaceGroupPresentation& p) {
    if (!ambient.membership(g)) throw PreconditionError("inner: word not in the ambient group");
    return VirtualAutomorphism::from_conjugation(p, ambient, ambient, g);
}

inline VirtualAutomorphism inner(const Word& g, const SurfaceGroupPresentation& p) {
    return inner(g, CosetTable::whole_group(p), p);
}

inline VirtualAutomorphism identity_vaut(const SurfaceGroupPresentation& p, const CosetTable& ambient) {
    return VirtualAutomorphism::from_conjugation(p, ambient, ambient, Word{});
}

// Agreement on the intersection of the domains. For verified isomorphisms
// this is the germ equivalence: two of them agreeing on generators of a
// finite-index subgroup agree on any smaller one.
inline bool vaut_equal(const VirtualAutomorphism& u, const VirtualAutomorphism& v) {
    if (u.presentation() != v.presentation()) throw PreconditionError("vaut_equal: presentations differ");
    if (u.ambient() != v.ambient()) throw PreconditionError("vaut_equal: ambient groups differ");
    CosetTable m = intersect(u.domain(), v.domain());
    SchreierData sd = schreier_data(m);
    for (const Word& s : sd.sgens) {
        if (!words_equal_in_group(u.apply(s), v.apply(s), u.presentation())) return false;
    }
    return true;
}

inline VirtualAutomorphism vaut_inverse(const VirtualAutomorphism& v) {
    std::optional<Word> conj;
    if (v.conjugator()) conj = inverse(*v.conjugator());
    VirtualAutomorphism out = VirtualAutomorphism::from_parts(
        v.presentation(), v.ambient(), v.codomain(), v.domain(), v.inverse_images(), v.images(), conj);
    out.set_orientation(v.orientation());
    return out;
}

// u after v: domain = v^-1(codomain(v) cap domain(u)).
inline VirtualAutomorphism vaut_compose(const VirtualAutomorphism& u, const VirtualAutomorphism& v,
                                        const VautOptions& opts = {}) {
    if (u.presentation() != v.presentation() || u.ambient() != v.ambient())
        throw PreconditionError("vaut_compose: mismatched ambient data");
    const SurfaceGroupPresentation& p = u.presentation();
    CosetTable mid = intersect(v.codomain(), u.domain());
    SchreierData mid_sd = schreier_data(mid);

    std::vector<Word> dom_gens, cod_gens;
    for (const Word& s : mid_sd.sgens) {
        dom_gens.push_back(v.apply_inverse(s));
        cod_gens.push_back(u.apply(s));
    }
    CosetTable dom, cod;
    std::optional<Word> conj;
    if (u.conjugator() && v.conjugator()) {
        conj = multiply(*u.conjugator(), *v.conjugator());
        dom = conjugate_table(mid, inverse(*v.conjugator()));
        cod = conjugate_table(mid, *u.conjugator());
    } else {
        dom = subgroup_from_words(p, dom_gens, opts.tc_max_cosets);
        cod = subgroup_from_words(p, cod_gens, opts.tc_max_cosets);
    }
    SchreierData dom_sd = schreier_data(dom);
    SchreierData cod_sd = schreier_data(cod);
    std::vector<Word> images, inverse_images;
    for (const Word& s : dom_sd.sgens) images.push_back(u.apply(v.apply(s)));
    for (const Word& s : cod_sd.sgens) inverse_images.push_back(v.apply_inverse(u.apply_inverse(s)));
    VirtualAutomorphism out =
        VirtualAutomorphism::from_parts(p, u.ambient(), dom, cod, images, inverse_images, conj);
    out.set_orientation(u.orientation() * v.orientation());
    return out;
}

// Restriction to a finite-index subgroup of the domain; equal to the
// original under vaut_equal by construction.
inline VirtualAutomorphism vaut_restrict(const VirtualAutomorphism& v, const CosetTable& d,
                                         const VautOptions& opts = {}) {
    if (!subgroup_contains(v.domain(), d))
        throw PreconditionError("vaut_restrict: subgroup not inside the domain");
    SchreierData d_sd = schreier_data(d);
    std::vector<Word> images;
    for (const Word& s : d_sd.sgens) images.push_back(v.apply(s));
    CosetTable cod;
    std::optional<Word> conj = v.conjugator();
    if (conj) {
        cod = conjugate_table(d, *conj);
    } else {
        cod = subgroup_from_words(v.presentation(), images, opts.tc_max_cosets);
    }
    SchreierData cod_sd = schreier_data(cod);
    std::vector<Word> inverse_images;
    for (const Word& s : cod_sd.sgens) inverse_images.push_back(v.apply_inverse(s));
    VirtualAutomorphism out = VirtualAutomorphism::from_parts(v.presentation(), v.ambient(), d, cod,
                                                              images, inverse_images, conj);
    out.set_orientation(v.orientation());
    return out;
}

namespace detail {

// Bounded search for a preimage of `target` as a short word over the domain
// Schreier alphabet, evaluated through `images`.
inline std::optional<Word> preimage_search(const SurfaceGroupPresentation& p,
                                           const std::vector<Word>& images, const Word& target,
                                           int max_len) {
    int m = static_cast<int>(images.size());
    std::vector<Word> frontier = {Word{}};
    std::vector<Word> values = {Word{}};
    if (target.empty()) return Word{};
    for (int len = 1; len <= max_len; ++len) {
        std::vector<Word> next_f, next_v;
        for (size_t i = 0; i < frontier.size(); ++i) {
            for (int k = 1; k <= m; ++k) {
                for (Letter x : {Letter(k), Letter(-k)}) {
                    if (!frontier[i].letters.empty() && frontier[i].letters.back() == -x) continue;
                    Word cand = frontier[i];
                    cand.letters.push_back(x);
                    Word val = multiply(values[i], x > 0 ? images[k - 1] : inverse(images[k - 1]));
                    if (words_equal_in_group(val, target, p)) return cand;
                    next_f.push_back(cand);
                    next_v.push_back(val);
                }
            }
        }
        frontier = std::move(next_f);
        values = std::move(next_v);
    }
    return std::nullopt;
}

}  // namespace detail

// Virtual automorphism pi_1(q) o pi_1(p)^-1 of a two-arrow diagram.
inline VirtualAutomorphism from_two_arrow(const TwoArrowDiagram& d, const VautOptions& opts = {}) {
    const SurfaceGroupPresentation& p = d.cover.presentation();
    const CosetTable& dom = d.cover;
    SchreierData dom_sd = schreier_data(dom);
    if (static_cast<int>(d.second_images.size()) != dom_sd.num_sgens())
        throw InvariantError("from_two_arrow: image count does not match the cover");

    CosetTable cod;
    if (d.conjugator) {
        cod = conjugate_table(dom, *d.conjugator);
    } else {
        cod = subgroup_from_words(p, d.second_images, opts.tc_max_cosets);
    }
    if (cod.degree() != dom.degree())
        throw InvariantError("from_two_arrow: arrows have different covering degrees; map cannot be injective");

    std::vector<Word> inverse_images;
    SchreierData cod_sd = schreier_data(cod);
    if (d.conjugator) {
        Word wi = inverse(*d.conjugator);
        for (const Word& s : cod_sd.sgens) inverse_images.push_back(conjugate(wi, s));
    } else {
        for (const Word& s : cod_sd.sgens) {
            auto pre = detail::preimage_search(p, d.second_images, s, opts.inverse_search_len);
            if (!pre)
                throw ResourceCapError("from_two_arrow: inverse image not found within search budget");
            inverse_images.push_back(schreier_expand(dom_sd, *pre));
        }
    }
    VirtualAutomorphism v = VirtualAutomorphism::from_parts(p, d.ambient, dom, cod, d.second_images,
                                                            inverse_images, d.conjugator);
    v.verify();
    return v;
}

// Arrow-by-arrow composite of a covering cycle.
inline VirtualAutomorphism cycle_composite(const CoveringCycle& c, const CosetTable& ambient,
                                           const VautOptions& opts = {}) {
    if (!c.well_formed()) throw InvariantError("covering cycle: malformed");
    std::optional<VirtualAutomorphism> acc;
    for (const CyclePass& ps : c.passes) {
        VirtualAutomorphism step = from_two_arrow(pass_diagram(ps, ambient), opts);
        acc = acc ? vaut_compose(step, *acc, opts) : step;
    }
    return *acc;
}

// Reduction of a covering cycle to a single two-arrow diagram by repeated
// fiber products; the result induces the same virtual automorphism.
inline TwoArrowDiagram reduce_cycle(const CoveringCycle& c, const CosetTable& ambient,
                                    const VautOptions& opts = {}) {
    VirtualAutomorphism v = cycle_composite(c, ambient, opts);
    TwoArrowDiagram d;
    d.cover = v.domain();
    d.second_images = v.images();
    d.ambient = ambient;
    d.conjugator = v.conjugator();
    return d;
}

// Bounded innerness certificate: the conjugating word if the element equals
// inner conjugation by some ambient word of length <= max_len, else nullopt
// ("not inner up to max_len", never an unconditional negative).
inline std::optional<Word> inner_witness(const VirtualAutomorphism& v, int max_len) {
    const SurfaceGroupPresentation& p = v.presentation();
    const SchreierData& dom_sd = v.domain_schreier();
    for (const Word& g : enumerate_ball(p, max_len)) {
        if (!v.ambient().membership(g)) continue;
        bool match = true;
        for (int i = 0; i < dom_sd.num_sgens() && match; ++i) {
            if (!words_equal_in_group(v.images()[i], conjugate(g, dom_sd.sgens[i]), p)) match = false;
        }
        if (match) return g;
    }
    return std::nullopt;
}

}  // namespace commensurate
