#pragma once

// Schreier transversals and Reidemeister-Schreier subgroup presentations.
//
// The transversal comes from the same BFS that canonicalizes tables, so
// representative words are stable. Schreier generators are indexed by the
// non-tree edges (coset, generator); rewriting traces a word through the
// table and collects the non-tree crossings.

#include <array>
#include <cstdint>
#include <vector>

#include "commensurate/coset_table.hpp"

namespace commensurate {

struct SchreierData {
    CosetTable table;
    std::vector<Word> reps;                    // coset representative words
    std::vector<std::vector<int>> edge_label;  // [gen-1][coset] -> sgen index+1, 0 for tree edge
    std::vector<Word> sgens;                   // Schreier generators as words in G

    int num_sgens() const { return static_cast<int>(sgens.size()); }
};

inline SchreierData schreier_data(const CosetTable& t) {
    SchreierData sd;
    sd.table = t;
    int n = t.degree();
    int ng = t.presentation().num_generators();
    sd.reps.assign(n, Word{});
    std::vector<bool> known(n, false);
    known[0] = true;
    std::vector<int> order = {0};
    std::vector<std::pair<int, int>> tree_edges;  // (coset, gen) pairs in the tree
    std::vector<std::vector<bool>> in_tree(ng, std::vector<bool>(n, false));
    for (size_t head = 0; head < order.size(); ++head) {
        int c = order[head];
        for (int k = 1; k <= ng; ++k) {
            for (Letter x : {Letter(k), Letter(-k)}) {
                int d = t.apply(c, x);
                if (!known[d]) {
                    known[d] = true;
                    order.push_back(d);
                    Word w = sd.reps[c];
                    w.letters.push_back(x);
                    sd.reps[d] = freely_reduce(w.letters);
                    if (x > 0)
                        in_tree[k - 1][c] = true;  // edge c --k--> d
                    else
                        in_tree[k - 1][d] = true;  // edge d --k--> c traversed backwards
                }
            }
        }
    }
    sd.edge_label.assign(ng, std::vector<int>(n, 0));
    for (int k = 0; k < ng; ++k) {
        for (int c = 0; c < n; ++c) {
            if (in_tree[k][c]) continue;
            int d = t.apply(c, k + 1);
            // s = rep(c) x rep(d)^-1
            Word s = multiply(multiply(sd.reps[c], freely_reduce({Letter(k + 1)})), inverse(sd.reps[d]));
            sd.sgens.push_back(s);
            sd.edge_label[k][c] = static_cast<int>(sd.sgens.size());
        }
    }
    return sd;
}

// Rewrite a word of G lying in H as a word over the Schreier generator
// alphabet (signed 1-based indices into sd.sgens).
inline Word schreier_rewrite(const SchreierData& sd, const Word& w) {
    if (!sd.table.membership(w)) throw PreconditionError("schreier_rewrite: word not in subgroup");
    std::vector<Letter> out;
    int c = 0;
    for (Letter x : w.letters) {
        if (x > 0) {
            int lbl = sd.edge_label[x - 1][c];
            if (lbl != 0) out.push_back(lbl);
            c = sd.table.apply(c, x);
        } else {
            int d = sd.table.apply(c, x);  // edge (d, -x) traversed backwards
            int lbl = sd.edge_label[-x - 1][d];
            if (lbl != 0) out.push_back(-lbl);
            c = d;
        }
    }
    return freely_reduce(out);
}

// Expand a word over the Schreier alphabet back into a word of G.
inline Word schreier_expand(const SchreierData& sd, const Word& sword) {
    Word out;
    for (Letter x : sword.letters) {
        int k = x > 0 ? x : -x;
        if (k < 1 || k > sd.num_sgens()) throw InvariantError("schreier_expand: index out of range");
        out = multiply(out, x > 0 ? sd.sgens[k - 1] : inverse(sd.sgens[k - 1]));
    }
    return out;
}

struct SchreierPresentation {
    SchreierData data;
    std::vector<Word> relators;  // words over the Schreier alphabet
    int derived_genus = 0;

    int num_generators() const { return data.num_sgens(); }
};

// sub <= sup, decided on Schreier generators.
inline bool subgroup_contains(const CosetTable& sup, const CosetTable& sub) {
    SchreierData sd = schreier_data(sub);
    for (const Word& s : sd.sgens)
        if (!sup.membership(s)) return false;
    return true;
}

inline SchreierPresentation schreier_presentation(const CosetTable& t) {
    SchreierPresentation sp;
    sp.data = schreier_data(t);
    Word r = t.presentation().relator();
    for (int c = 0; c < t.degree(); ++c) {
        Word conj = multiply(multiply(sp.data.reps[c], r), inverse(sp.data.reps[c]));
        Word rw = schreier_rewrite(sp.data, conj);
        if (!rw.empty()) sp.relators.push_back(rw);
    }
    sp.derived_genus = t.derived_genus();
    return sp;
}

// --- integer matrix rank (abelianization oracle) -------------------------
//
// Rank of the relator exponent matrix over a large prime; this never
// overestimates the rational rank, so equality assertions stay sound.
inline int matrix_rank_mod_p(std::vector<std::vector<long long>> m, long long p = 2147483647LL) {
    int rows = static_cast<int>(m.size());
    if (rows == 0) return 0;
    int cols = static_cast<int>(m[0].size());
    auto modp = [p](long long v) {
        v %= p;
        return v < 0 ? v + p : v;
    };
    auto powmod = [p](long long b, long long e) {
        long long r = 1;
        b %= p;
        while (e) {
            if (e & 1) r = (__int128)r * b % p;
            b = (__int128)b * b % p;
            e >>= 1;
        }
        return r;
    };
    int rank = 0;
    for (int col = 0; col < cols && rank < rows; ++col) {
        int pivot = -1;
        for (int r = rank; r < rows; ++r)
            if (modp(m[r][col]) != 0) {
                pivot = r;
                break;
            }
        if (pivot < 0) continue;
        std::swap(m[rank], m[pivot]);
        long long inv = powmod(modp(m[rank][col]), p - 2);
        for (int r = rank + 1; r < rows; ++r) {
            long long f = (__int128)modp(m[r][col]) * inv % p;
            if (f == 0) continue;
            for (int c2 = col; c2 < cols; ++c2)
                m[r][c2] = modp(m[r][c2] - (__int128)f * modp(m[rank][c2]) % p);
        }
        ++rank;
    }
    return rank;
}

// Rank of H^ab = number of Schreier generators minus rank of the relator
// exponent matrix. For a finite-index subgroup of a surface group this is
// 2 * derived_genus.
inline int abelianization_rank(const SchreierPresentation& sp) {
    int m = sp.num_generators();
    std::vector<std::vector<long long>> mat;
    for (const Word& r : sp.relators) {
        std::vector<long long> row(m, 0);
        for (Letter x : r.letters) row[(x > 0 ? x : -x) - 1] += x > 0 ? 1 : -1;
        mat.push_back(row);
    }
    if (mat.empty()) return m;
    return m - matrix_rank_mod_p(mat);
}

// --- nested subgroups -----------------------------------------------------
//
// Given D <= H <= G with H's table over G and D's table over H's Schreier
// alphabet, produce D's table over G. Cosets of D in G are pairs
// (coset of H in G, coset of D in H).
inline CosetTable induced_table(const SchreierData& h_in_g,
                                const std::vector<std::vector<int>>& d_fwd_over_sgens) {
    const CosetTable& hg = h_in_g.table;
    int n = hg.degree();
    int d_deg = d_fwd_over_sgens.empty() ? 1 : static_cast<int>(d_fwd_over_sgens[0].size());
    int ng = hg.presentation().num_generators();
    int m = h_in_g.num_sgens();

    auto apply_sword = [&](int e, const Word& sword) {
        for (Letter x : sword.letters) {
            int k = x > 0 ? x : -x;
            if (k < 1 || k > m) throw InvariantError("induced_table: bad schreier letter");
            if (x > 0) {
                e = d_fwd_over_sgens[k - 1][e];
            } else {
                int found = -1;
                for (int c = 0; c < d_deg; ++c)
                    if (d_fwd_over_sgens[k - 1][c] == e) {
                        found = c;
                        break;
                    }
                e = found;
            }
        }
        return e;
    };

    std::vector<std::vector<int>> fwd(ng, std::vector<int>(n * d_deg, -1));
    for (int c = 0; c < n; ++c) {
        for (int e = 0; e < d_deg; ++e) {
            for (int k = 1; k <= ng; ++k) {
                int c2 = hg.apply(c, k);
                // carry = rep(c) x rep(c2)^-1, an element of H
                Word carry = multiply(multiply(h_in_g.reps[c], freely_reduce({Letter(k)})),
                                      inverse(h_in_g.reps[c2]));
                Word sw = schreier_rewrite(h_in_g, carry);
                int e2 = apply_sword(e, sw);
                fwd[k - 1][c * d_deg + e] = c2 * d_deg + e2;
            }
        }
    }
    return CosetTable::from_perms(hg.presentation(), fwd, 0);
}

}  // namespace commensurate
