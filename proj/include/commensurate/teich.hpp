#pragma once

// Teichmuller points over strata of the subgroup lattice, the
// commensurability modular action by precomposition, the trace-gap
// effectiveness experiment, and commensurator certificates for Moebius maps.
//
// A point carries a stratum (pointed cover of the master group) and a
// relation-exact representation of the stratum's Schreier presentation.
// Points are compared through conjugation-invariant trace coordinates after
// restriction to a common stratum, never through raw matrices.

#include <optional>
#include <vector>

#include "commensurate/cover.hpp"
#include "commensurate/fuchsian.hpp"
#include "commensurate/vaut.hpp"

namespace commensurate {

struct TeichPoint {
    PointedCover stratum;
    SchreierData schreier;   // of the stratum subgroup
    FuchsianRep rep;         // over the Schreier alphabet

    int derived_genus() const { return stratum.table.derived_genus(); }

    // evaluate a master-group word lying in the stratum subgroup
    MoebiusMap eval_word(const Word& w) const {
        Word sw = schreier_rewrite(schreier, w);
        return rep.eval(sw);
    }
};

inline TeichPoint make_teich_point(const CosetTable& stratum, FuchsianRep rep) {
    TeichPoint t;
    t.stratum = PointedCover(stratum);
    t.schreier = schreier_data(stratum);
    if (rep.pres.num_gens != t.schreier.num_sgens())
        throw PreconditionError("teich point: representation alphabet does not match the stratum");
    t.rep = std::move(rep);
    return t;
}

inline TeichPoint base_point(const FundamentalPolygon& poly) {
    SurfaceGroupPresentation p(poly.genus);
    return make_teich_point(CosetTable::whole_group(p), poly.rep);
}

// |trace| at every Schreier generator and every product of two (unordered;
// traces of AB and BA agree), in a fixed order.
inline std::vector<double> trace_coordinates(const TeichPoint& t) {
    int m = t.rep.pres.num_gens;
    std::vector<MoebiusMap> gens;
    for (int i = 1; i <= m; ++i) gens.push_back(t.rep.eval(freely_reduce({Letter(i)})));
    std::vector<double> out;
    for (int i = 0; i < m; ++i) out.push_back(gens[i].abs_trace());
    for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j) out.push_back((gens[i] * gens[j]).abs_trace());
    return out;
}

// Restriction T(p): evaluate the deeper subgroup's Schreier generators.
inline TeichPoint restrict_point(const TeichPoint& t, const CosetTable& to) {
    if (!subgroup_contains(t.stratum.table, to))
        throw PreconditionError("restrict_point: target stratum does not factor through the source");
    SchreierData to_sd = schreier_data(to);
    SchreierPresentation sp = schreier_presentation(to);
    FuchsianRep rep;
    rep.pres.num_gens = to_sd.num_sgens();
    rep.pres.relators = sp.relators;
    for (const Word& s : to_sd.sgens) rep.gens.push_back(t.eval_word(s));
    TeichPoint out;
    out.stratum = PointedCover(to);
    out.schreier = to_sd;
    out.rep = rep;
    return out;
}

inline double trace_distance(const std::vector<double>& u, const std::vector<double>& v) {
    if (u.size() != v.size()) throw PreconditionError("trace_distance: stratum mismatch");
    double d = 0;
    for (size_t i = 0; i < u.size(); ++i) d = std::max(d, std::abs(u[i] - v[i]));
    return d;
}

// Equality as Teichmuller points: trace coordinates agree after restriction
// to the intersection of the strata.
inline bool points_equal(const TeichPoint& a, const TeichPoint& b, double tol = 1e-6) {
    CosetTable common = intersect(a.stratum.table, b.stratum.table);
    TeichPoint ra = restrict_point(a, common);
    TeichPoint rb = restrict_point(b, common);
    return trace_distance(trace_coordinates(ra), trace_coordinates(rb)) < tol;
}

// The commensurability modular action: restrict to the domain stratum and
// precompose with the inverse isomorphism; the image lives in the codomain
// stratum.
inline TeichPoint modular_action(const VirtualAutomorphism& v, const TeichPoint& t) {
    TeichPoint on_domain = restrict_point(t, v.domain());
    const CosetTable& k = v.codomain();
    SchreierData k_sd = schreier_data(k);
    SchreierPresentation k_sp = schreier_presentation(k);
    FuchsianRep rep;
    rep.pres.num_gens = k_sd.num_sgens();
    rep.pres.relators = k_sp.relators;
    for (const Word& s : k_sd.sgens) rep.gens.push_back(on_domain.eval_word(v.apply_inverse(s)));
    TeichPoint out;
    out.stratum = PointedCover(k);
    out.schreier = k_sd;
    out.rep = rep;
    return out;
}

// --- effectiveness experiment ------------------------------------------------

struct EffectivenessOptions {
    int inner_search_len = 3;
    double delta = 1e-3;
    double residual_tol = 1e-9;
    int attempts = 50;
    double perturbation = 0.004;  // continuation step size; larger walks use more steps
    std::uint64_t seed = 7;
};

struct EffectivenessWitness {
    FuchsianRep rep;       // over the ambient's Schreier presentation
    Word h1;               // domain generator separated by the representation
    double trace_gap = 0;
    double residual = 0;
    int attempts_used = 0;
};

// Searches for a relation-exact normalized representation of the ambient
// surface group separating |tr(h1)| from |tr(v(h1))|. Requires ambient
// derived genus >= 3; genus two is rejected (the hyperelliptic involution
// makes the corresponding action non-effective there).
inline EffectivenessWitness effectiveness_experiment(const VirtualAutomorphism& v,
                                                     const FundamentalPolygon& seed_poly,
                                                     const EffectivenessOptions& opts = {}) {
    const CosetTable& ambient = v.ambient();
    int g_prime = ambient.derived_genus();
    if (g_prime < 3)
        throw PreconditionError(
            "effectiveness_experiment: ambient genus must be at least three (genus-2 actions are "
            "famously non-effective)");
    if (inner_witness(v, opts.inner_search_len))
        throw PreconditionError("effectiveness_experiment: element is inner at this search depth");

    // a domain generator moved by v
    const SchreierData& dom_sd = v.domain_schreier();
    std::optional<Word> h1;
    for (int i = 0; i < dom_sd.num_sgens(); ++i) {
        if (!is_identity(multiply(v.images()[i], inverse(dom_sd.sgens[i])), v.presentation())) {
            h1 = dom_sd.sgens[i];
            break;
        }
    }
    if (!h1) throw PreconditionError("effectiveness_experiment: element fixes every domain generator");

    SchreierData amb_sd = schreier_data(ambient);
    SchreierPresentation amb_sp = schreier_presentation(ambient);
    GroupPresentation pres;
    pres.num_gens = amb_sd.num_sgens();
    pres.relators = amb_sp.relators;

    // seed with the polygon restriction; anchor on the two largest-trace
    // hyperbolic generators with distinct axes
    std::vector<MoebiusMap> seed;
    for (const Word& s : amb_sd.sgens) seed.push_back(seed_poly.rep.eval(s));
    int anchor_b = -1, anchor_a = -1;
    double best_tr = 0;
    for (int i = 0; i < pres.num_gens; ++i) {
        if (!seed[i].is_hyperbolic()) continue;
        if (seed[i].abs_trace() > best_tr) {
            best_tr = seed[i].abs_trace();
            anchor_b = i;
        }
    }
    for (int i = 0; i < pres.num_gens; ++i) {
        if (i == anchor_b || !seed[i].is_hyperbolic()) continue;
        BoundaryFixedPoints fb = hyperbolic_fixed_points(seed[anchor_b]);
        BoundaryFixedPoints fa = hyperbolic_fixed_points(seed[i]);
        if (std::abs(fa.attracting - fb.attracting) > 1e-6 &&
            std::abs(fa.attracting - fb.repelling) > 1e-6) {
            anchor_a = i;
            break;
        }
    }
    if (anchor_b < 0 || anchor_a < 0)
        throw NumericError("effectiveness_experiment: no usable anchor generators in the seed");

    Word vh1 = v.apply(*h1);

    // the polygon restriction is an exact starting solution; deformation
    // walks the variety from there
    FuchsianRep seed_rep;
    seed_rep.pres = pres;
    seed_rep.gens = seed;

    double best_gap = 0;
    for (int attempt = 0; attempt < opts.attempts; ++attempt) {
        FuchsianRep rep;
        try {
            int nsteps = 2 + 2 * (attempt % 6);
            rep = deform_rep(pres, seed_rep, anchor_a, anchor_b, opts.perturbation, nsteps,
                             opts.seed + 1000 * attempt, opts.residual_tol);
        } catch (const NumericError&) {
            continue;
        }
        TeichPoint pt;
        pt.stratum = PointedCover(ambient);
        pt.schreier = amb_sd;
        pt.rep = rep;
        double gap = std::abs(pt.eval_word(*h1).abs_trace() - pt.eval_word(vh1).abs_trace());
        best_gap = std::max(best_gap, gap);
        if (gap > opts.delta && rep.relation_residual() < opts.residual_tol) {
            // report in Fricke-normalized position; traces are unchanged
            FuchsianRep normalized = rep;
            try {
                normalized = normalize_anchors(rep, anchor_a, anchor_b);
            } catch (const NumericError&) {
            }
            if (normalized.relation_residual() >= opts.residual_tol) normalized = rep;
            return EffectivenessWitness{normalized, *h1, gap, normalized.relation_residual(),
                                        attempt + 1};
        }
    }
    throw NumericError("effectiveness_experiment: no witness found; best trace gap " +
                       std::to_string(best_gap));
}

// --- commensurator certificates ----------------------------------------------

struct CommCertificate {
    enum class Status { SUCCESS, UNKNOWN };
    Status status = Status::UNKNOWN;
    int depth = 0;
    int collected = 0;                 // group elements with conjugate back in the group
    int index_domain = 0;              // index of the subgroup they generate
    int index_image = 0;               // index of the conjugated subgroup
    std::optional<int> gamma_order;    // least m with gamma^m in the group, if found
};

// Collects h with gamma rho(h) gamma^-1 in rho(G) up to word length L via
// fundamental-domain membership, then coset-enumerates both sides.
inline CommCertificate commensurator_certificate(const MoebiusMap& gamma, const FundamentalPolygon& poly,
                                                 int depth, int tc_max_cosets = 20000,
                                                 int order_cap = 200) {
    SurfaceGroupPresentation p(poly.genus);
    CommCertificate cert;
    cert.depth = depth;
    MoebiusMap gi = gamma.inverse();
    std::vector<Word> collected, image_words;
    for (const Word& h : enumerate_ball(p, depth)) {
        if (h.empty()) continue;
        MoebiusMap conj = gamma * poly.rep.eval(h) * gi;
        auto member = poly.membership(conj);
        if (member) {
            collected.push_back(h);
            image_words.push_back(*member);
        }
    }
    cert.collected = static_cast<int>(collected.size());
    if (collected.empty()) return cert;
    try {
        CosetTable dom = subgroup_from_words(p, collected, tc_max_cosets);
        CosetTable img = subgroup_from_words(p, image_words, tc_max_cosets);
        cert.index_domain = dom.degree();
        cert.index_image = img.degree();
        cert.status = CommCertificate::Status::SUCCESS;
    } catch (const ResourceCapError&) {
        return cert;  // UNKNOWN at this budget
    }
    // order of gamma modulo the group, when finite and small
    MoebiusMap pow = gamma;
    for (int m = 1; m <= order_cap; ++m) {
        if (poly.membership(pow)) {
            cert.gamma_order = m;
            break;
        }
        pow = pow * gamma;
    }
    return cert;
}

// Does the Moebius map realize the virtual automorphism on its domain
// generators: gamma rho(h) gamma^-1 = rho(v(h)).
inline bool realizes(const MoebiusMap& gamma, const VirtualAutomorphism& v, const FuchsianRep& master_rep,
                     double tol = 1e-8) {
    MoebiusMap gi = gamma.inverse();
    const SchreierData& sd = v.domain_schreier();
    for (int i = 0; i < sd.num_sgens(); ++i) {
        MoebiusMap lhs = gamma * master_rep.eval(sd.sgens[i]) * gi;
        MoebiusMap rhs = master_rep.eval(v.images()[i]);
        if (lhs.dist(rhs) > tol) return false;
    }
    return true;
}

// Builds the virtual automorphism induced by a Moebius map in the
// commensurator, with images recovered as exact words through the
// fundamental domain. The domain is the subgroup generated by the collected
// elements.
inline VirtualAutomorphism vaut_from_moebius(const MoebiusMap& gamma, const FundamentalPolygon& poly,
                                             int depth, int tc_max_cosets = 20000) {
    SurfaceGroupPresentation p(poly.genus);
    MoebiusMap gi = gamma.inverse();
    std::vector<Word> collected;
    for (const Word& h : enumerate_ball(p, depth)) {
        if (h.empty()) continue;
        if (poly.membership(gamma * poly.rep.eval(h) * gi)) collected.push_back(h);
    }
    if (collected.empty())
        throw ResourceCapError("vaut_from_moebius: no conjugation-stable elements at this depth");
    CosetTable dom = subgroup_from_words(p, collected, tc_max_cosets);
    SchreierData dom_sd = schreier_data(dom);
    std::vector<Word> images;
    for (const Word& s : dom_sd.sgens) {
        auto img = poly.membership(gamma * poly.rep.eval(s) * gi);
        if (!img)
            throw ResourceCapError("vaut_from_moebius: generated subgroup is not conjugation-stable");
        images.push_back(*img);
    }
    CosetTable cod = subgroup_from_words(p, images, tc_max_cosets);
    SchreierData cod_sd = schreier_data(cod);
    std::vector<Word> inverse_images;
    for (const Word& s : cod_sd.sgens) {
        auto img = poly.membership(gi * poly.rep.eval(s) * gamma);
        if (!img) throw ResourceCapError("vaut_from_moebius: inverse image recovery failed");
        inverse_images.push_back(*img);
    }
    VirtualAutomorphism v = VirtualAutomorphism::from_parts(p, CosetTable::whole_group(p), dom, cod,
                                                            images, inverse_images);
    v.verify();
    return v;
}

}  // namespace commensurate
