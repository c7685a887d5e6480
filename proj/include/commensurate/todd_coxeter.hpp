#pragma once

// Todd-Coxeter coset enumeration (HLT strategy with coincidence handling).
//
// Enumerates the cosets of the subgroup generated by a list of words in a
// finitely presented group. Terminates iff the index is finite and the
// working-coset cap is large enough; the cap raises ResourceCapError, which
// callers treat as "unknown at this budget".

#include <deque>
#include <vector>

#include "commensurate/coset_table.hpp"

namespace commensurate {

namespace detail {

class ToddCoxeter {
public:
    ToddCoxeter(int num_gens, std::vector<Word> relators, std::vector<Word> subgens, int max_cosets)
        : ng_(num_gens), relators_(std::move(relators)), subgens_(std::move(subgens)),
          max_cosets_(max_cosets) {
        alloc_coset();  // coset 0
    }

    // Runs the enumeration; returns the coset action of each generator on
    // the surviving cosets (renumbered contiguously).
    std::vector<std::vector<int>> run() {
        for (const Word& w : subgens_) scan_and_fill(0, w);
        for (size_t c = 0; c < parent_.size(); ++c) {
            if (!alive(static_cast<int>(c))) continue;
            for (const Word& r : relators_) {
                scan_and_fill(static_cast<int>(c), r);
                if (!alive(static_cast<int>(c))) break;
            }
            if (!alive(static_cast<int>(c))) continue;
            // Complete the row; fresh cosets are appended and scanned later.
            for (int k = 1; k <= ng_; ++k) {
                if (get(static_cast<int>(c), k) < 0) {
                    int d = alloc_coset();
                    set(static_cast<int>(c), k, d);
                }
            }
        }
        return compress();
    }

private:
    bool alive(int c) const { return parent_[c] == c; }

    int rep(int c) {
        while (parent_[c] != c) {
            parent_[c] = parent_[parent_[c]];
            c = parent_[c];
        }
        return c;
    }

    int alloc_coset() {
        if (static_cast<int>(parent_.size()) >= max_cosets_)
            throw ResourceCapError("todd-coxeter: coset cap exceeded");
        int c = static_cast<int>(parent_.size());
        parent_.push_back(c);
        fwd_.emplace_back(ng_, -1);
        bwd_.emplace_back(ng_, -1);
        return c;
    }

    int get(int c, Letter x) const {
        int k = x > 0 ? x : -x;
        return x > 0 ? fwd_[c][k - 1] : bwd_[c][k - 1];
    }

    void set(int c, Letter x, int d) {
        int k = x > 0 ? x : -x;
        if (x > 0) {
            fwd_[c][k - 1] = d;
            bwd_[d][k - 1] = c;
        } else {
            bwd_[c][k - 1] = d;
            fwd_[d][k - 1] = c;
        }
    }

    void merge(int a, int b) {
        a = rep(a);
        b = rep(b);
        if (a == b) return;
        if (a > b) std::swap(a, b);
        parent_[b] = a;
        queue_.push_back(b);
    }

    void process_coincidences() {
        while (!queue_.empty()) {
            int dead = queue_.front();
            queue_.pop_front();
            for (int k = 1; k <= ng_; ++k) {
                for (Letter x : {Letter(k), Letter(-k)}) {
                    int d = (x > 0) ? fwd_[dead][k - 1] : bwd_[dead][k - 1];
                    if (d < 0) continue;
                    // Remove the back-reference from d to the dead coset.
                    if (x > 0) {
                        if (bwd_[d][k - 1] == dead) bwd_[d][k - 1] = -1;
                        fwd_[dead][k - 1] = -1;
                    } else {
                        if (fwd_[d][k - 1] == dead) fwd_[d][k - 1] = -1;
                        bwd_[dead][k - 1] = -1;
                    }
                    int u = rep(dead), v = rep(d);
                    int existing = get(u, x);
                    if (existing >= 0) {
                        merge(existing, v);
                    } else {
                        int other = get(v, -x);
                        if (other >= 0) {
                            merge(other, u);
                        } else {
                            set(u, x, v);
                        }
                    }
                }
            }
        }
    }

    void scan_and_fill(int c, const Word& w) {
        c = rep(c);
        if (w.empty()) return;
        const auto& ls = w.letters;
        int i = 0, j = static_cast<int>(ls.size()) - 1;
        int f = c, b = c;
        while (true) {
            while (i <= j) {
                int next = get(f, ls[i]);
                if (next < 0) break;
                f = next;
                ++i;
            }
            if (i > j) {
                if (f != b) {
                    merge(f, b);
                    process_coincidences();
                }
                return;
            }
            while (j >= i) {
                int prev = get(b, -ls[j]);
                if (prev < 0) break;
                b = prev;
                --j;
            }
            if (j < i) {
                // fully scanned from both ends; inconsistent meet point
                merge(f, b);
                process_coincidences();
                return;
            }
            if (i == j) {
                // deduction: f . ls[i] = b
                set(f, ls[i], b);
                return;
            }
            // stuck with a gap: define a new coset and continue scanning
            int d = alloc_coset();
            set(f, ls[i], d);
            f = d;
            ++i;
        }
    }

    std::vector<std::vector<int>> compress() {
        std::vector<int> newnum(parent_.size(), -1);
        int n = 0;
        for (size_t c = 0; c < parent_.size(); ++c)
            if (alive(static_cast<int>(c))) newnum[c] = n++;
        std::vector<std::vector<int>> out(ng_, std::vector<int>(n, -1));
        for (size_t c = 0; c < parent_.size(); ++c) {
            if (!alive(static_cast<int>(c))) continue;
            for (int k = 0; k < ng_; ++k) {
                int d = fwd_[c][k];
                if (d < 0) throw InvariantError("todd-coxeter: incomplete table after run");
                out[k][newnum[c]] = newnum[rep(d)];
            }
        }
        return out;
    }

    int ng_;
    std::vector<Word> relators_;
    std::vector<Word> subgens_;
    int max_cosets_;
    std::vector<int> parent_;
    std::vector<std::vector<int>> fwd_, bwd_;  // [coset][gen-1]
    std::deque<int> queue_;
};

}  // namespace detail

// Coset table of the subgroup generated by `words` in the surface group.
inline CosetTable subgroup_from_words(const SurfaceGroupPresentation& p, const std::vector<Word>& words,
                                      int max_cosets = 200000) {
    detail::ToddCoxeter tc(p.num_generators(), {p.relator()}, words, max_cosets);
    auto fwd = tc.run();
    return CosetTable::from_perms(p, fwd, 0);
}

}  // namespace commensurate
