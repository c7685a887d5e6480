#include <doctest.h>

#include <random>

#include "commensurate/word.hpp"

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

// Reduce with randomized cancellation order; free reduction is confluent so
// the result must match the stack-based reduction.
Word reduce_random_order(std::mt19937_64& rng, std::vector<Letter> ls) {
    while (true) {
        std::vector<size_t> sites;
        for (size_t i = 0; i + 1 < ls.size(); ++i)
            if (ls[i] == -ls[i + 1]) sites.push_back(i);
        if (sites.empty()) break;
        std::uniform_int_distribution<size_t> pick(0, sites.size() - 1);
        size_t at = sites[pick(rng)];
        ls.erase(ls.begin() + at, ls.begin() + at + 2);
    }
    Word w;
    w.letters = ls;
    return w;
}

}  // namespace

TEST_CASE("free reduction basics") {
    SurfaceGroupPresentation p(2);
    Word a1 = parse_word("a1");
    Word a1i = parse_word("A1");
    CHECK(multiply(a1, a1i).empty());
    CHECK(multiply(Word{}, parse_word("b2")) == parse_word("b2"));
    CHECK(multiply(parse_word("a1b1"), parse_word("B1a2")) == parse_word("a1a2"));
}

TEST_CASE("free reduction is confluent") {
    SurfaceGroupPresentation p(2);
    std::mt19937_64 rng(12345);
    std::uniform_int_distribution<int> gen(1, 4), sign(0, 1), len(0, 20);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Letter> raw;
        int n = len(rng);
        for (int i = 0; i < n; ++i) raw.push_back(sign(rng) ? gen(rng) : -gen(rng));
        Word canonical = freely_reduce(raw);
        Word shuffled = reduce_random_order(rng, raw);
        CHECK(canonical == shuffled);
    }
}

TEST_CASE("word text round trip") {
    Word w = parse_word("a1B2a2A1");
    CHECK(to_string(w) == "a1B2a2A1");
    CHECK(parse_word(to_string(w)) == w);
    CHECK(to_string(Word{}) == "");
    CHECK(parse_word("1").empty());
}

TEST_CASE("group axioms on random triples") {
    SurfaceGroupPresentation p(2);
    std::mt19937_64 rng(777);
    for (int trial = 0; trial < 100; ++trial) {
        Word u = random_word(rng, p, 6), v = random_word(rng, p, 6), w = random_word(rng, p, 6);
        CHECK(multiply(multiply(u, v), w) == multiply(u, multiply(v, w)));
        CHECK(multiply(u, inverse(u)).empty());
        CHECK(multiply(inverse(u), u).empty());
    }
}

TEST_CASE("dehn identity: relator and trivial cases") {
    SurfaceGroupPresentation p(2);
    CHECK(is_identity(p.relator(), p));
    CHECK(!is_identity(parse_word("a1"), p));
    CHECK(is_identity(Word{}, p));
    CHECK(!is_identity(parse_word("a1b1A1B1"), p));  // genus-2: single commutator is nontrivial

    SurfaceGroupPresentation p3(3);
    CHECK(is_identity(p3.relator(), p3));
    CHECK(!is_identity(parse_word("a3b3"), p3));
}

TEST_CASE("dehn identity: relator square") {
    SurfaceGroupPresentation p(2);
    Word r = p.relator();
    CHECK(is_identity(multiply(r, r), p));
    // conjugates of the relator
    Word g = parse_word("a2B1a1");
    CHECK(is_identity(conjugate(g, r), p));
}

TEST_CASE("dehn identity agrees with permutation-quotient oracle") {
    // Oracle: a word with nontrivial image in some transitive permutation
    // action of degree <= 4 is nontrivial. Words the oracle cannot separate
    // must reduce to the empty word via the relator table.
    SurfaceGroupPresentation p(2);

    // All homomorphisms G -> S_3 given by images of the four generators that
    // kill the relator; check consistency on short words.
    auto perms3 = [] {
        std::vector<std::array<int, 3>> ps;
        std::array<int, 3> base = {0, 1, 2};
        std::sort(base.begin(), base.end());
        do { ps.push_back(base); } while (std::next_permutation(base.begin(), base.end()));
        return ps;
    }();
    auto act = [&](const std::array<int, 3>& perm, int x) { return perm[x]; };
    auto inv3 = [&](const std::array<int, 3>& perm) {
        std::array<int, 3> r{};
        for (int i = 0; i < 3; ++i) r[perm[i]] = i;
        return r;
    };
    auto eval = [&](const std::vector<std::array<int, 3>>& imgs, const Word& w) {
        std::array<int, 3> acc = {0, 1, 2};
        for (Letter x : w.letters) {
            const auto& m = x > 0 ? imgs[x - 1] : inv3(imgs[-x - 1]);
            std::array<int, 3> next{};
            for (int i = 0; i < 3; ++i) next[i] = act(m, acc[i]);
            acc = next;
        }
        return acc;
    };

    std::vector<std::vector<std::array<int, 3>>> homs;
    Word rel = p.relator();
    for (const auto& ia : perms3)
        for (const auto& ib : perms3)
            for (const auto& ic : perms3)
                for (const auto& id : perms3) {
                    std::vector<std::array<int, 3>> imgs = {ia, ib, ic, id};
                    std::array<int, 3> idp = {0, 1, 2};
                    if (eval(imgs, rel) == idp) homs.push_back(imgs);
                }
    REQUIRE(homs.size() > 1);

    std::mt19937_64 rng(4242);
    int oracle_nontrivial = 0;
    for (int trial = 0; trial < 150; ++trial) {
        Word w = random_word(rng, p, 1 + static_cast<int>(trial % 8));
        bool dehn_trivial = is_identity(w, p);
        bool separated = false;
        std::array<int, 3> idp = {0, 1, 2};
        for (const auto& h : homs)
            if (eval(h, w) != idp) {
                separated = true;
                break;
            }
        if (separated) {
            ++oracle_nontrivial;
            CHECK(!dehn_trivial);
        }
        if (dehn_trivial) CHECK(!separated);
    }
    CHECK(oracle_nontrivial > 50);
}

TEST_CASE("abelianization") {
    SurfaceGroupPresentation p(2);
    auto z = abelianize(p.relator(), p);
    for (auto v : z) CHECK(v == 0);

    Word w = parse_word("a1a1B2");
    auto img = abelianize(w, p);
    CHECK(img == std::vector<long long>({2, 0, 0, -1}));

    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        Word u = random_word(rng, p, 7), v = random_word(rng, p, 5);
        auto uv = abelianize(multiply(u, v), p);
        auto au = abelianize(u, p);
        auto av = abelianize(v, p);
        for (int i = 0; i < p.num_generators(); ++i) CHECK(uv[i] == au[i] + av[i]);
    }
}

TEST_CASE("ball enumeration counts") {
    SurfaceGroupPresentation p(2);
    auto ball1 = enumerate_ball(p, 1);
    CHECK(ball1.size() == 1 + 8);
    auto ball2 = enumerate_ball(p, 2);
    CHECK(ball2.size() == 1 + 8 + 8 * 7);
}
