#include <doctest.h>

#include <random>

#include "commensurate/iv4.hpp"
#include "commensurate/solenoid.hpp"

using namespace commensurate;

namespace {

Word random_word(std::mt19937_64& rng, const SurfaceGroupPresentation& p, int len) {
    std::uniform_int_distribution<int> gen(1, p.num_generators());
    std::uniform_int_distribution<int> sign(0, 1);
    std::vector<Letter> ls;
    for (int i = 0; i < len; ++i) {
        int k = gen(rng);
        ls.push_back(sign(rng) ? k : -k);
    }
    return freely_reduce(ls);
}

CosetTable mod2_kernel(const SurfaceGroupPresentation& p, int gen_index) {
    std::vector<std::vector<int>> fwd(p.num_generators(), {0, 1});
    fwd[gen_index - 1] = {1, 0};
    return CosetTable::from_perms(p, fwd, 0);
}

}  // namespace

TEST_CASE("ord and the profinite metric") {
    SurfaceGroupPresentation p(2);
    LevelSpec lv = LevelSpec::a_chain(p, 3, 2);
    CHECK(lv.quotient_order(2) == 16);

    CHECK(ord(Word{}, lv).infinity_at_level);
    CHECK(ord(p.relator(), lv).infinity_at_level);
    OrdResult oa = ord(parse_word("a1"), lv);
    CHECK(!oa.infinity_at_level);
    CHECK(oa.value == 1);

    CHECK(profinite_distance(parse_word("a1b2"), parse_word("a1b2"), lv) == 0.0);
    CHECK(profinite_distance(Word{}, parse_word("a1"), lv) == doctest::Approx(std::exp(-1.0)));

    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        Word u = random_word(rng, p, 6), v = random_word(rng, p, 6), w = random_word(rng, p, 6);
        double duv = profinite_distance(u, v, lv);
        double dvw = profinite_distance(v, w, lv);
        double duw = profinite_distance(u, w, lv);
        CHECK(duw <= std::max(duv, dvw) + 1e-12);  // ultrametric bound: ord(uv) >= min ord
    }
    // subadditivity of ord under products
    for (int trial = 0; trial < 100; ++trial) {
        Word u = random_word(rng, p, 5), v = random_word(rng, p, 5);
        OrdResult ou = ord(u, lv), ov = ord(v, lv), ouv = ord(multiply(u, v), lv);
        int mu = ou.infinity_at_level ? lv.depth() : ou.value;
        int mv = ov.infinity_at_level ? lv.depth() : ov.value;
        int muv = ouv.infinity_at_level ? lv.depth() : ouv.value;
        CHECK(muv >= std::min(mu, mv));
    }
}

TEST_CASE("profinite element compatibility") {
    SurfaceGroupPresentation p(2);
    LevelSpec lv = LevelSpec::a_chain(p, 3, 2);
    TruncatedProfiniteElement ok = TruncatedProfiniteElement::constant(parse_word("a1b2"), 3);
    ok.check_compatible(lv);

    TruncatedProfiniteElement bad;
    bad.reps = {Word{}, parse_word("a1"), parse_word("a1")};  // a1 not in A_1 = G? A_1 = whole group
    // level 1 is the whole group, so the break must be placed deeper:
    bad.reps = {parse_word("a1"), parse_word("a1"), parse_word("b1")};
    CHECK_THROWS_AS(bad.check_compatible(lv), InvariantError);
}

TEST_CASE("base leaf search") {
    SurfaceGroupPresentation p(2);
    LevelSpec lv = LevelSpec::a_chain(p, 3, 2);
    BaseLeafResult b0 = base_leaf_test(solenoid_base_point(3), lv, 2);
    CHECK(b0.found);
    CHECK(b0.witness.empty());

    SolenoidPoint moved{FundamentalPolygon::basepoint(),
                        TruncatedProfiniteElement::constant(parse_word("a1b2"), 3)};
    BaseLeafResult b1 = base_leaf_test(moved, lv, 2);
    CHECK(b1.found);
    CHECK(words_equal_in_group(b1.witness, parse_word("a1b2"), p));

    // a deep coset whose class misses the short ball: reported honestly
    SolenoidPoint deep{FundamentalPolygon::basepoint(),
                       TruncatedProfiniteElement::constant(parse_word("a1b1a2b2a1b1a2b2"), 3)};
    BaseLeafResult b2 = base_leaf_test(deep, lv, 1);
    CHECK(!b2.found);
    BaseLeafResult b3 = base_leaf_test(deep, lv, 8);
    CHECK(b3.found);  // generous budget recovers it
}

TEST_CASE("qh level transport") {
    SurfaceGroupPresentation p(2);
    LevelSpec lv = LevelSpec::a_chain(p, 2, 2);
    CosetTable h = mod2_kernel(p, 1);
    QHLevelReport rep = qh_level_check(h, *lv.combined_table(2), 6);
    CHECK(rep.counting_bijective);
    CHECK(rep.h_cap_g_equals_h);
    CHECK(rep.orbit_size == rep.index_h_cap_n_in_h);

    // point transport: H-levels refining the G-levels carry points across
    CosetTable a2h = intersect(*lv.combined_table(2), h);
    std::vector<CosetTable> h_levels = {h, a2h};
    SolenoidPoint pt{FundamentalPolygon::basepoint(), TruncatedProfiniteElement::constant(Word{}, 2)};
    SolenoidPoint out = level_map_qh(pt, h_levels, lv);
    CHECK(base_leaf_test(out, lv, 1).found);
}

TEST_CASE("extension formula on the truncated solenoid") {
    SurfaceGroupPresentation p(2);
    FundamentalPolygon poly = polygon_group(2);
    LevelSpec lv = LevelSpec::a_chain(p, 2, 2);
    SolenoidPoint base = solenoid_base_point(2);

    // identity
    SolenoidPoint id_img = extend_to_solenoid(MoebiusMap::identity(),
                                              identity_vaut(p, CosetTable::whole_group(p)), base, poly, lv);
    CHECK(std::abs(id_img.z - base.z) < 1e-12);

    // deck action of a group word
    Word g = parse_word("a1b2");
    SolenoidPoint g_img = extend_to_solenoid(poly.rep.eval(g), inner(g, p), base, poly, lv);
    CHECK(std::abs(g_img.z - base.z) < 1e-9);  // folds back to the basepoint
    BaseLeafResult bl = base_leaf_test(g_img, lv, 3);
    CHECK(bl.found);
    CHECK(words_equal_in_group(bl.witness, g, p));

    // certificate-missing: a map that does not realize the element
    CHECK_THROWS_AS(
        extend_to_solenoid(MoebiusMap(2, 0.3, 0.5, 0.575), inner(g, p), base, poly, lv),
        PreconditionError);

    // commensurator rotation: base leaf preserved, plane action matches
    MoebiusMap rot = to_half_plane(DiskMap::rotation(2 * M_PI / 8));
    VirtualAutomorphism v_rot = vaut_from_moebius(rot, poly, 3);
    SolenoidPoint r_img = extend_to_solenoid(rot, v_rot, base, poly, lv);
    CHECK(base_leaf_test(r_img, lv, 3).found);
    FundamentalPolygon::Reduction red = poly.reduce(to_disk(rot).apply(base.z));
    CHECK(std::abs(red.point - r_img.z) < 1e-9);
}

TEST_CASE("measure of the full polygon and cylinders") {
    SurfaceGroupPresentation p(2);
    FundamentalPolygon poly = polygon_group(2);
    MeasureEstimate full = measure_report(poly, Region::full(), 1.0, 150000, 7);
    CHECK(std::abs(full.value - 4 * M_PI) < 3 * full.se);
    MeasureEstimate half = measure_report(poly, Region::full(), 0.5, 150000, 7);
    CHECK(half.value == doctest::Approx(full.value / 2));
    MeasureEstimate empty = measure_report(poly, Region::disk(Complex(0, 0), 0.0), 1.0, 5000, 7);
    CHECK(empty.value == 0.0);
}

TEST_CASE("cover pushforward consistency") {
    SurfaceGroupPresentation p(2);
    FundamentalPolygon poly = polygon_group(2);
    auto subs = enumerate_subgroups(p, 2);
    int tested = 0;
    for (const auto& t : subs) {
        if (t.degree() != 2 || tested >= 2) continue;
        PushforwardCheck chk =
            cover_pushforward_check(poly, t, Region::disk(Complex(0.2, 0.1), 0.35), 80000, 11 + tested);
        CHECK(chk.within(3.0));
        ++tested;
    }
    CHECK(tested == 2);
}

TEST_CASE("density probe directions") {
    FundamentalPolygon poly = polygon_group(2);
    std::vector<MoebiusMap> arith = arithmetic_sample_generators();
    DensityProbeResult a4 = density_probe(arith, 4);
    DensityProbeResult a6 = density_probe(arith, 6);
    DensityProbeResult a8 = density_probe(arith, 8);
    CHECK(a4.coverage < a6.coverage);
    CHECK(a6.coverage < a8.coverage);

    DensityProbeResult d8 = density_probe(poly.rep.gens, 8);
    DensityProbeResult d12 = density_probe(poly.rep.gens, 12);
    CHECK(d8.coverage == d12.coverage);
    CHECK(d8.products == d12.products);  // ball exhausted: plateau

    // identity-only sample covers only the identity cell
    DensityProbeResult id_only = density_probe({}, 4);
    CHECK(id_only.coverage > 0);
    CHECK(id_only.coverage < a4.coverage + 1e-12);
}
