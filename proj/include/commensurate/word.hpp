#pragma once

// Words in the genus-g surface group and the exact word problem.
//
// A letter is a signed 1-based generator index: +k is generator k, -k its
// inverse. The generator order for genus g is a1, b1, a2, b2, ..., ag, bg,
// so a_j has index 2j-1 and b_j has index 2j. Words are kept freely reduced.
// Text form: "a1" for a1, "A1" for its inverse, letters concatenated.

#include <cctype>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "commensurate/errors.hpp"

namespace commensurate {

using Letter = int;

struct Word {
    std::vector<Letter> letters;

    Word() = default;

    bool empty() const { return letters.empty(); }
    int length() const { return static_cast<int>(letters.size()); }

    bool operator==(const Word& other) const { return letters == other.letters; }
    bool operator!=(const Word& other) const { return letters != other.letters; }
    bool operator<(const Word& other) const { return letters < other.letters; }
};

// Free reduction: cancel adjacent x x^-1 pairs until none remain.
inline Word freely_reduce(const std::vector<Letter>& raw) {
    Word out;
    out.letters.reserve(raw.size());
    for (Letter x : raw) {
        if (x == 0) throw InvariantError("word: zero letter");
        if (!out.letters.empty() && out.letters.back() == -x)
            out.letters.pop_back();
        else
            out.letters.push_back(x);
    }
    return out;
}

inline Word word_from_letters(std::vector<Letter> ls) { return freely_reduce(ls); }

inline Word multiply(const Word& u, const Word& v) {
    std::vector<Letter> cat = u.letters;
    cat.insert(cat.end(), v.letters.begin(), v.letters.end());
    return freely_reduce(cat);
}

inline Word inverse(const Word& w) {
    Word out;
    out.letters.reserve(w.letters.size());
    for (auto it = w.letters.rbegin(); it != w.letters.rend(); ++it) out.letters.push_back(-*it);
    return out;
}

inline Word conjugate(const Word& g, const Word& w) {
    // g w g^-1
    return multiply(multiply(g, w), inverse(g));
}

inline Word power(const Word& w, int n) {
    Word out;
    Word base = n >= 0 ? w : inverse(w);
    for (int i = 0; i < (n >= 0 ? n : -n); ++i) out = multiply(out, base);
    return out;
}

inline std::uint64_t word_hash(const Word& w) {
    std::uint64_t h = 1469598103934665603ull;
    for (Letter x : w.letters) {
        h ^= static_cast<std::uint64_t>(static_cast<std::int64_t>(x));
        h *= 1099511628211ull;
    }
    return h;
}

struct SurfaceGroupPresentation {
    int genus = 2;

    explicit SurfaceGroupPresentation(int g = 2) : genus(g) {
        if (g < 2) throw PreconditionError("surface group: genus must be >= 2");
    }

    int num_generators() const { return 2 * genus; }

    Letter a(int j) const { return 2 * j - 1; }  // 1-based
    Letter b(int j) const { return 2 * j; }

    // prod_j [a_j, b_j], length 4g, cyclically reduced.
    Word relator() const {
        std::vector<Letter> ls;
        ls.reserve(4 * genus);
        for (int j = 1; j <= genus; ++j) {
            ls.push_back(a(j));
            ls.push_back(b(j));
            ls.push_back(-a(j));
            ls.push_back(-b(j));
        }
        return freely_reduce(ls);
    }

    bool operator==(const SurfaceGroupPresentation& o) const { return genus == o.genus; }
    bool operator!=(const SurfaceGroupPresentation& o) const { return genus != o.genus; }
};

// --- text I/O ----------------------------------------------------------

inline std::string generator_name(Letter x) {
    int k = x > 0 ? x : -x;
    int j = (k + 1) / 2;
    char c = (k % 2 == 1) ? 'a' : 'b';
    if (x < 0) c = static_cast<char>(std::toupper(c));
    return std::string(1, c) + std::to_string(j);
}

inline std::string to_string(const Word& w) {
    std::string s;
    for (Letter x : w.letters) s += generator_name(x);
    return s;
}

inline Word parse_word(const std::string& text) {
    std::vector<Letter> ls;
    size_t i = 0;
    if (text == "1" || text == "e") return Word{};
    while (i < text.size()) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c)) || c == '*' || c == '.') {
            ++i;
            continue;
        }
        bool inv = std::isupper(static_cast<unsigned char>(c));
        char low = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (low != 'a' && low != 'b') throw InvariantError("parse_word: bad letter '" + std::string(1, c) + "'");
        ++i;
        size_t start = i;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
        if (start == i) throw InvariantError("parse_word: missing generator index in '" + text + "'");
        int j = std::stoi(text.substr(start, i - start));
        if (j < 1) throw InvariantError("parse_word: generator index must be >= 1");
        Letter k = (low == 'a') ? (2 * j - 1) : (2 * j);
        ls.push_back(inv ? -k : k);
    }
    return freely_reduce(ls);
}

// --- abelianization ----------------------------------------------------

inline std::vector<long long> abelianize(const Word& w, const SurfaceGroupPresentation& p) {
    std::vector<long long> v(p.num_generators(), 0);
    for (Letter x : w.letters) {
        int k = x > 0 ? x : -x;
        if (k > p.num_generators()) throw InvariantError("abelianize: letter outside presentation");
        v[k - 1] += x > 0 ? 1 : -1;
    }
    return v;
}

// --- Dehn's algorithm ---------------------------------------------------
//
// The surface relator satisfies the small cancellation condition needed for
// Dehn's algorithm: any freely reduced word representing 1 contains more
// than half of a cyclic conjugate of the relator or its inverse. Replacing
// that subword by the inverse of the complement strictly shortens the word.

class DehnReducer {
public:
    explicit DehnReducer(const SurfaceGroupPresentation& p) : pres_(p) {
        Word r = p.relator();
        Word ri = inverse(r);
        int n = r.length();
        for (int s = 0; s < n; ++s) {
            rotations_.push_back(rotate(r.letters, s));
            rotations_.push_back(rotate(ri.letters, s));
        }
        half_ = 2 * p.genus;  // |relator| / 2
    }

    // One pass of greedy replacement; returns true if a replacement fired.
    bool step(std::vector<Letter>& w) const {
        const int need = half_ + 1;
        int len = static_cast<int>(w.size());
        if (len < need) return false;
        for (int pos = 0; pos + need <= len; ++pos) {
            for (const auto& rot : rotations_) {
                int match = 0;
                int cap = std::min<int>(static_cast<int>(rot.size()), len - pos);
                while (match < cap && w[pos + match] == rot[match]) ++match;
                if (match >= need) {
                    // rot = s t with s the matched prefix; s == t^-1 in the group.
                    std::vector<Letter> repl;
                    for (int i = static_cast<int>(rot.size()) - 1; i >= match; --i) repl.push_back(-rot[i]);
                    std::vector<Letter> next(w.begin(), w.begin() + pos);
                    next.insert(next.end(), repl.begin(), repl.end());
                    next.insert(next.end(), w.begin() + pos + match, w.end());
                    w = freely_reduce(next).letters;
                    return true;
                }
            }
        }
        return false;
    }

    bool is_identity(const Word& w) const {
        std::vector<Letter> cur = w.letters;
        while (!cur.empty()) {
            if (!step(cur)) return false;
        }
        return true;
    }

    const SurfaceGroupPresentation& presentation() const { return pres_; }

private:
    static std::vector<Letter> rotate(const std::vector<Letter>& v, int s) {
        std::vector<Letter> out;
        out.reserve(v.size());
        for (size_t i = 0; i < v.size(); ++i) out.push_back(v[(i + s) % v.size()]);
        return out;
    }

    SurfaceGroupPresentation pres_;
    std::vector<std::vector<Letter>> rotations_;
    int half_;
};

inline bool is_identity(const Word& w, const SurfaceGroupPresentation& p) {
    return DehnReducer(p).is_identity(w);
}

inline bool words_equal_in_group(const Word& u, const Word& v, const SurfaceGroupPresentation& p) {
    return is_identity(multiply(u, inverse(v)), p);
}

// All freely reduced words of length <= max_len over the 2g generators,
// in length-lexicographic order starting with the empty word.
inline std::vector<Word> enumerate_ball(const SurfaceGroupPresentation& p, int max_len) {
    std::vector<Word> out;
    out.push_back(Word{});
    std::vector<Word> frontier = {Word{}};
    int ng = p.num_generators();
    for (int len = 1; len <= max_len; ++len) {
        std::vector<Word> next;
        for (const Word& w : frontier) {
            for (int k = 1; k <= ng; ++k) {
                for (Letter x : {Letter(k), Letter(-k)}) {
                    if (!w.letters.empty() && w.letters.back() == -x) continue;
                    Word e = w;
                    e.letters.push_back(x);
                    next.push_back(e);
                }
            }
        }
        out.insert(out.end(), next.begin(), next.end());
        frontier = std::move(next);
    }
    return out;
}

}  // namespace commensurate
