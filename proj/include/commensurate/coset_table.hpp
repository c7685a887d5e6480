#pragma once

// Finite-index subgroups of the surface group as coset tables.
//
// A CosetTable stores the permutation action of the generators on the right
// cosets of a subgroup H, with coset 0 = H. Tables are kept in canonical
// form: cosets numbered by breadth-first search from 0 with generator edge
// order +1, -1, +2, -2, ...  Two tables are equal iff they encode the same
// subgroup.

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <set>
#include <vector>

#include "commensurate/word.hpp"

namespace commensurate {

struct EnumLimits {
    long long max_count = 100000;   // subgroups returned
    long long max_nodes = 50000000; // search tree nodes
    int max_core_degree = 20000;    // permutation image order for normal_core
    int max_cosets = 200000;        // Todd-Coxeter working cosets
};

class CosetTable {
public:
    CosetTable() = default;

    // Table of the whole group (index 1).
    static CosetTable whole_group(const SurfaceGroupPresentation& p) {
        CosetTable t;
        t.pres_ = p;
        t.degree_ = 1;
        t.fwd_.assign(p.num_generators(), std::vector<int>(1, 0));
        t.bwd_ = t.fwd_;
        return t;
    }

    // From explicit permutations fwd[gen][coset]; canonicalizes from `base`.
    static CosetTable from_perms(const SurfaceGroupPresentation& p,
                                 const std::vector<std::vector<int>>& fwd, int base = 0) {
        CosetTable t;
        t.pres_ = p;
        t.degree_ = fwd.empty() ? 0 : static_cast<int>(fwd[0].size());
        t.fwd_ = fwd;
        t.rebuild_bwd();
        t.validate();
        return t.canonical(base);
    }

    const SurfaceGroupPresentation& presentation() const { return pres_; }
    int degree() const { return degree_; }
    int genus() const { return pres_.genus; }

    // Derived genus of the covering surface: g' - 1 = n (g - 1).
    int derived_genus() const { return degree_ * (pres_.genus - 1) + 1; }

    int apply(int coset, Letter x) const {
        int k = x > 0 ? x : -x;
        return x > 0 ? fwd_[k - 1][coset] : bwd_[k - 1][coset];
    }

    int trace(int coset, const Word& w) const {
        int c = coset;
        for (Letter x : w.letters) c = apply(c, x);
        return c;
    }

    bool membership(const Word& w) const { return trace(0, w) == 0; }

    const std::vector<std::vector<int>>& perms() const { return fwd_; }

    // BFS renumbering from `base`; result has base coset 0.
    CosetTable canonical(int base = 0) const {
        std::vector<int> newnum(degree_, -1);
        std::vector<int> order;
        order.reserve(degree_);
        newnum[base] = 0;
        order.push_back(base);
        for (size_t head = 0; head < order.size(); ++head) {
            int c = order[head];
            for (int k = 1; k <= pres_.num_generators(); ++k) {
                for (Letter x : {Letter(k), Letter(-k)}) {
                    int d = apply(c, x);
                    if (newnum[d] == -1) {
                        newnum[d] = static_cast<int>(order.size());
                        order.push_back(d);
                    }
                }
            }
        }
        if (static_cast<int>(order.size()) != degree_)
            throw InvariantError("coset table: action not transitive");
        CosetTable t;
        t.pres_ = pres_;
        t.degree_ = degree_;
        t.fwd_.assign(pres_.num_generators(), std::vector<int>(degree_, -1));
        for (int k = 0; k < pres_.num_generators(); ++k)
            for (int c = 0; c < degree_; ++c) t.fwd_[k][newnum[c]] = newnum[fwd_[k][c]];
        t.rebuild_bwd();
        return t;
    }

    bool operator==(const CosetTable& o) const {
        return pres_ == o.pres_ && degree_ == o.degree_ && fwd_ == o.fwd_;
    }
    bool operator!=(const CosetTable& o) const { return !(*this == o); }
    bool operator<(const CosetTable& o) const {
        if (degree_ != o.degree_) return degree_ < o.degree_;
        return fwd_ < o.fwd_;
    }

    // Largest normal subgroup of G contained in this subgroup: the kernel of
    // the permutation representation, i.e. the regular action of the image
    // permutation group.
    CosetTable normal_core(const EnumLimits& limits = {}) const;

    bool is_normal() const {
        for (int c = 1; c < degree_; ++c)
            if (canonical(c) != *this) return false;
        return true;
    }

    // Subgroup of the product action through (0,0): H1 cap H2.
    friend CosetTable intersect(const CosetTable& t1, const CosetTable& t2);

    void validate() const {
        for (int k = 0; k < pres_.num_generators(); ++k) {
            std::vector<bool> seen(degree_, false);
            if (static_cast<int>(fwd_[k].size()) != degree_)
                throw InvariantError("coset table: ragged row");
            for (int c = 0; c < degree_; ++c) {
                int d = fwd_[k][c];
                if (d < 0 || d >= degree_ || seen[d])
                    throw InvariantError("coset table: generator row is not a bijection");
                seen[d] = true;
            }
        }
        Word r = pres_.relator();
        for (int c = 0; c < degree_; ++c)
            if (trace(c, r) != c) throw InvariantError("coset table: relator acts nontrivially");
    }

private:
    void rebuild_bwd() {
        bwd_.assign(fwd_.size(), std::vector<int>(degree_, -1));
        for (size_t k = 0; k < fwd_.size(); ++k)
            for (int c = 0; c < degree_; ++c) bwd_[k][fwd_[k][c]] = c;
    }

    SurfaceGroupPresentation pres_{2};
    int degree_ = 0;
    std::vector<std::vector<int>> fwd_;  // fwd_[gen-1][coset]
    std::vector<std::vector<int>> bwd_;
};

inline CosetTable intersect(const CosetTable& t1, const CosetTable& t2) {
    if (t1.presentation() != t2.presentation())
        throw PreconditionError("intersect: presentations differ");
    int n2 = t2.degree();
    auto enc = [n2](int a, int b) { return a * n2 + b; };
    std::map<int, int> num;
    std::vector<std::pair<int, int>> order;
    num[enc(0, 0)] = 0;
    order.push_back({0, 0});
    int ng = t1.presentation().num_generators();
    std::vector<std::vector<int>> fwd(ng);
    for (size_t head = 0; head < order.size(); ++head) {
        auto [c1, c2] = order[head];
        for (int k = 1; k <= ng; ++k) {
            int d1 = t1.apply(c1, k), d2 = t2.apply(c2, k);
            auto it = num.find(enc(d1, d2));
            int idx;
            if (it == num.end()) {
                idx = static_cast<int>(order.size());
                num[enc(d1, d2)] = idx;
                order.push_back({d1, d2});
            } else {
                idx = it->second;
            }
            fwd[k - 1].resize(order.size(), -1);
            fwd[k - 1][head] = idx;
        }
    }
    for (int k = 0; k < ng; ++k) fwd[k].resize(order.size(), -1);
    return CosetTable::from_perms(t1.presentation(), fwd, 0);
}

inline CosetTable CosetTable::normal_core(const EnumLimits& limits) const {
    // Close the generated permutation group; cosets of the core are its
    // elements, generators act by right multiplication.
    std::map<std::vector<int>, int> index;
    std::vector<std::vector<int>> elems;
    std::vector<int> id(degree_);
    std::iota(id.begin(), id.end(), 0);
    index[id] = 0;
    elems.push_back(id);
    int ng = pres_.num_generators();
    for (size_t head = 0; head < elems.size(); ++head) {
        for (int k = 0; k < ng; ++k) {
            std::vector<int> prod(degree_);
            for (int c = 0; c < degree_; ++c) prod[c] = fwd_[k][elems[head][c]];
            if (!index.count(prod)) {
                if (static_cast<int>(elems.size()) >= limits.max_core_degree)
                    throw ResourceCapError("normal_core: permutation image exceeds cap");
                index[prod] = static_cast<int>(elems.size());
                elems.push_back(prod);
            }
        }
    }
    int order = static_cast<int>(elems.size());
    std::vector<std::vector<int>> fwd(ng, std::vector<int>(order, -1));
    for (int e = 0; e < order; ++e) {
        for (int k = 0; k < ng; ++k) {
            std::vector<int> prod(degree_);
            for (int c = 0; c < degree_; ++c) prod[c] = fwd_[k][elems[e][c]];
            fwd[k][e] = index.at(prod);
        }
    }
    return CosetTable::from_perms(pres_, fwd, 0);
}

// --- low-index enumeration ----------------------------------------------
//
// Backtracking over partial tables. Entries are filled in breadth-first scan
// order and new cosets get the next free number, so every completed table is
// already in canonical form and each subgroup appears exactly once.
// Conjugate subgroups are kept distinct.

namespace detail {

class LowIndexSearch {
public:
    LowIndexSearch(const SurfaceGroupPresentation& p, int max_index, const EnumLimits& limits)
        : pres_(p), max_index_(max_index), limits_(limits), relator_(p.relator()) {
        ng_ = p.num_generators();
    }

    std::vector<CosetTable> run() {
        fwd_.assign(ng_, std::vector<int>(1, -1));
        bwd_.assign(ng_, std::vector<int>(1, -1));
        degree_ = 1;
        dfs();
        std::sort(results_.begin(), results_.end());
        return results_;
    }

private:
    int get(int c, Letter x) const {
        int k = x > 0 ? x : -x;
        return x > 0 ? fwd_[k - 1][c] : bwd_[k - 1][c];
    }

    void set(int c, Letter x, int d) {
        int k = x > 0 ? x : -x;
        if (x > 0) {
            fwd_[k - 1][c] = d;
            bwd_[k - 1][d] = c;
        } else {
            bwd_[k - 1][c] = d;
            fwd_[k - 1][d] = c;
        }
    }

    void unset(int c, Letter x) {
        int k = x > 0 ? x : -x;
        if (x > 0) {
            int d = fwd_[k - 1][c];
            fwd_[k - 1][c] = -1;
            if (d >= 0) bwd_[k - 1][d] = -1;
        } else {
            int d = bwd_[k - 1][c];
            bwd_[k - 1][c] = -1;
            if (d >= 0) fwd_[k - 1][d] = -1;
        }
    }

    // Relator closure check. Traces the relator from every coset; a complete
    // trace that misses its start kills the branch.
    bool relator_consistent() const {
        for (int c = 0; c < degree_; ++c) {
            int cur = c;
            bool complete = true;
            for (Letter x : relator_.letters) {
                cur = get(cur, x);
                if (cur < 0) {
                    complete = false;
                    break;
                }
            }
            if (complete && cur != c) return false;
        }
        return true;
    }

    bool table_complete() const {
        for (int k = 0; k < ng_; ++k)
            for (int c = 0; c < degree_; ++c)
                if (fwd_[k][c] < 0) return false;
        return true;
    }

    // First undefined slot in scan order (coset, then +1,-1,+2,-2,...).
    bool first_undefined(int& c, Letter& x) const {
        for (int cc = 0; cc < degree_; ++cc) {
            for (int k = 1; k <= ng_; ++k) {
                if (get(cc, k) < 0) {
                    c = cc;
                    x = k;
                    return true;
                }
                if (get(cc, -k) < 0) {
                    c = cc;
                    x = -k;
                    return true;
                }
            }
        }
        return false;
    }

    void emit() {
        std::vector<std::vector<int>> fwd = fwd_;
        CosetTable t = CosetTable::from_perms(pres_, fwd, 0);
        results_.push_back(t);
        if (static_cast<long long>(results_.size()) > limits_.max_count)
            throw ResourceCapError("enumerate_subgroups: subgroup count exceeds cap");
    }

    void dfs() {
        if (++nodes_ > limits_.max_nodes)
            throw ResourceCapError("enumerate_subgroups: search node cap exceeded");
        if (!relator_consistent()) return;
        int c;
        Letter x;
        if (!first_undefined(c, x)) {
            emit();
            return;
        }
        // Existing cosets whose reverse slot is free, then one fresh coset.
        for (int d = 0; d < degree_; ++d) {
            if (get(d, -x) >= 0) continue;
            set(c, x, d);
            dfs();
            unset(c, x);
        }
        if (degree_ < max_index_) {
            int d = degree_;
            ++degree_;
            for (int k = 0; k < ng_; ++k) {
                fwd_[k].push_back(-1);
                bwd_[k].push_back(-1);
            }
            set(c, x, d);
            dfs();
            unset(c, x);
            for (int k = 0; k < ng_; ++k) {
                fwd_[k].pop_back();
                bwd_[k].pop_back();
            }
            --degree_;
        }
    }

    SurfaceGroupPresentation pres_;
    int max_index_;
    EnumLimits limits_;
    Word relator_;
    int ng_ = 0;
    int degree_ = 0;
    long long nodes_ = 0;
    std::vector<std::vector<int>> fwd_, bwd_;
    std::vector<CosetTable> results_;
};

}  // namespace detail

// All subgroups of index <= max_index, each exactly once, sorted
// deterministically by (degree, table). Cost grows super-exponentially in
// max_index; the limits guard desk-scale use.
inline std::vector<CosetTable> enumerate_subgroups(const SurfaceGroupPresentation& p, int max_index,
                                                   const EnumLimits& limits = {}) {
    if (max_index < 1) throw PreconditionError("enumerate_subgroups: max_index must be >= 1");
    detail::LowIndexSearch search(p, max_index, limits);
    return search.run();
}

}  // namespace commensurate
