#pragma once

// Numeric holomorphic i-forms (weight 2i) on covers of the polygon surface,
// built as Poincare series over norm-capped group balls with polynomial
// seeds. Pullback along a cover reindexes the automorphy group; transfer
// averages over coset translates, so transfer o pullback is the identity
// pointwise. The Petersson pairing is Monte Carlo over translated copies of
// the fundamental polygon, normalized by covering degree.

#include <complex>
#include <functional>
#include <map>
#include <vector>

#include "commensurate/fuchsian.hpp"
#include "commensurate/numeric.hpp"
#include "commensurate/schreier.hpp"

namespace commensurate {

struct AutomorphicForm {
    int i = 2;                                   // weight 2i
    CosetTable group;                            // automorphy subgroup of the master group
    std::function<Complex(Complex)> eval;
    double tail_estimate = 0;                    // bound on the dropped terms at radius 0.5
    bool conditionally_convergent = false;       // i == 1 carries this warning

    Complex operator()(Complex z) const { return eval(z); }
};

struct SeriesOptions {
    int budget = 40;              // word length over the subgroup generators
    double norm_cap = 60.0;       // Frobenius cap on group elements kept
    double intermediate_factor = 1.35;  // BFS slack above the cap
    long max_elements = 2000000;
    Complex seed_shift{0, 0};     // seed (z - shift)^m; breaks symmetry between seeds
    // When set, use the rational seed 1/(z - pole)^{power} instead of the
    // shifted monomial; the pole must lie outside the closed disk.
    std::optional<Complex> seed_pole;
};

namespace detail {

inline double disk_norm(const DiskMap& m) { return std::sqrt(2 * (std::norm(m.a) + std::norm(m.b))); }

// Ball of distinct subgroup elements as disk maps, BFS over the Schreier
// generators with quantized-matrix deduplication and a norm cap.
inline std::vector<DiskMap> element_ball(const FundamentalPolygon& poly, const CosetTable& group,
                                         const SeriesOptions& opts) {
    SchreierData sd = schreier_data(group);
    std::vector<DiskMap> alphabet;
    for (const Word& s : sd.sgens) {
        DiskMap m = poly.eval_disk(s);
        alphabet.push_back(m);
        alphabet.push_back(m.inverse());
    }
    // Quantized-matrix keys with neighbor-cell probing: floating error along
    // different BFS paths to one element stays far below the cell size, and
    // distinct elements of the discrete group stay several cells apart, so
    // probing the adjacent cells makes the deduplication exact.
    constexpr double quantum = 1e-6;
    auto key_of = [quantum](const DiskMap& m) {
        Complex a = m.a, b = m.b;
        if (a.real() < 0) {
            a = -a;
            b = -b;
        }
        auto q = [quantum](double v) { return static_cast<long long>(std::llround(v / quantum)); };
        return std::array<long long, 4>{q(a.real()), q(a.imag()), q(b.real()), q(b.imag())};
    };
    std::set<std::array<long long, 4>> seen;
    auto probe_insert = [&seen](const std::array<long long, 4>& key) {
        std::array<long long, 4> probe;
        for (int d0 = -1; d0 <= 1; ++d0)
            for (int d1 = -1; d1 <= 1; ++d1)
                for (int d2 = -1; d2 <= 1; ++d2)
                    for (int d3 = -1; d3 <= 1; ++d3) {
                        probe = {key[0] + d0, key[1] + d1, key[2] + d2, key[3] + d3};
                        if (seen.count(probe)) return false;
                    }
        seen.insert(key);
        return true;
    };
    std::vector<DiskMap> out = {DiskMap::identity()};
    probe_insert(key_of(out[0]));
    std::vector<DiskMap> frontier = out;
    double intermediate_cap = opts.norm_cap * opts.intermediate_factor;
    for (int len = 1; len <= opts.budget && !frontier.empty(); ++len) {
        std::vector<DiskMap> next;
        for (const auto& m : frontier) {
            for (const auto& g : alphabet) {
                DiskMap prod = m * g;
                if (disk_norm(prod) > intermediate_cap) continue;
                if (!probe_insert(key_of(prod))) continue;
                next.push_back(prod);
                if (disk_norm(prod) <= opts.norm_cap) out.push_back(prod);
                if (static_cast<long>(seen.size()) > opts.max_elements)
                    throw ResourceCapError("poincare_series: element cap exceeded");
            }
        }
        frontier = std::move(next);
    }
    return out;
}

}  // namespace detail

// f(z) = sum over the element ball of seed(gamma z) (gamma'(z))^i with
// polynomial seed z^m (poles only at infinity, outside every orbit).
// Weight 2 (i = 1) is only conditionally convergent; a smooth norm cutoff
// stands in for the missing absolute convergence and the form carries a
// warning flag.
inline AutomorphicForm poincare_series(const FundamentalPolygon& poly, const CosetTable& group, int i,
                                       int seed_power, const SeriesOptions& opts = {}) {
    if (i < 1) throw PreconditionError("poincare_series: weight index must be >= 1");
    if (seed_power < 0) throw PreconditionError("poincare_series: seed power must be >= 0");
    std::vector<DiskMap> ball = detail::element_ball(poly, group, opts);

    double tail = 0;
    for (const auto& m : ball) {
        double n = detail::disk_norm(m);
        if (n > opts.norm_cap * 0.9) tail += std::pow(n, -2.0 * i);
    }

    if (opts.seed_pole && std::abs(*opts.seed_pole) <= 1.0 + 1e-9)
        throw PreconditionError("poincare_series: seed pole must lie outside the closed disk");
    bool conditional = (i == 1);
    double cutoff = opts.norm_cap / 2.5;
    int ii = i;
    int mm = seed_power;
    Complex shift = opts.seed_shift;
    std::optional<Complex> pole = opts.seed_pole;
    std::vector<DiskMap> elements = ball;
    AutomorphicForm f;
    f.i = i;
    f.group = group;
    f.tail_estimate = tail;
    f.conditionally_convergent = conditional;
    f.eval = [elements, ii, mm, conditional, cutoff, shift, pole](Complex z) {
        Complex acc = 0;
        for (const auto& g : elements) {
            Complex gz = g.apply(z);
            Complex der = g.derivative(z);
            Complex term = pole ? std::pow(gz - *pole, -mm) : std::pow(gz - shift, mm);
            Complex dp = 1;
            for (int k = 0; k < ii; ++k) dp *= der;
            double weight = 1.0;
            if (conditional) {
                double n = detail::disk_norm(g);
                weight = std::exp(-(n * n) / (cutoff * cutoff));
            }
            acc += weight * term * dp;
        }
        return acc;
    };
    return f;
}

inline AutomorphicForm zero_form(const CosetTable& group, int i) {
    AutomorphicForm f;
    f.i = i;
    f.group = group;
    f.eval = [](Complex) { return Complex(0, 0); };
    return f;
}

// Weight-twisted precomposition with a deck transformation (a Moebius map
// normalizing the form's group): another form for the same group.
inline AutomorphicForm deck_translate(const AutomorphicForm& f, const DiskMap& delta) {
    DiskMap delta_inv = delta.inverse();
    auto inner = f.eval;
    int i = f.i;
    AutomorphicForm g = f;
    g.eval = [inner, delta_inv, i](Complex z) {
        Complex dp = 1;
        for (int k = 0; k < i; ++k) dp *= delta_inv.derivative(z);
        return inner(delta_inv.apply(z)) * dp;
    };
    return g;
}

// Relative automorphy residual of f at sample points against the subgroup
// generators: |f(gz) g'(z)^i - f(z)| / scale.
inline double automorphy_residual(const AutomorphicForm& f, const FundamentalPolygon& poly,
                                  int num_samples = 20, std::uint64_t seed = 3) {
    SchreierData sd = schreier_data(f.group);
    std::vector<DiskMap> gens;
    for (const Word& s : sd.sgens) gens.push_back(poly.eval_disk(s));
    auto rng = seeded_rng(seed, 0xAF);
    std::uniform_real_distribution<double> ur(-0.35, 0.35);
    double worst = 0;
    for (int t = 0; t < num_samples; ++t) {
        Complex z(ur(rng), ur(rng));
        Complex fz = f(z);
        double scale = std::max(std::abs(fz), 1e-6);
        for (const auto& g : gens) {
            Complex lhs = f(g.apply(z));
            Complex dp = 1;
            for (int k = 0; k < f.i; ++k) dp *= g.derivative(z);
            worst = std::max(worst, std::abs(lhs * dp - fz) / scale);
        }
    }
    return worst;
}

// View a form on the base as a form on the cover: the same function with the
// smaller automorphy group. Pointwise values are untouched.
inline AutomorphicForm pullback(const AutomorphicForm& f, const CosetTable& cover) {
    if (!subgroup_contains(f.group, cover))
        throw PreconditionError("pullback: cover subgroup not inside the form's automorphy group");
    AutomorphicForm out = f;
    out.group = cover;
    return out;
}

// Coset-averaged transfer p_i: (1/d) times the sum of automorphy-twisted
// translates over a transversal of from_cover inside to_group.
// transfer(pullback(f)) = f holds pointwise.
inline AutomorphicForm transfer(const AutomorphicForm& f, const CosetTable& to_group,
                                const FundamentalPolygon& poly) {
    const CosetTable& from_cover = f.group;
    if (!subgroup_contains(to_group, from_cover))
        throw PreconditionError("transfer: form's group is not a subgroup of the target");
    SchreierData sd = schreier_data(from_cover);
    int dd = from_cover.degree() / std::max(1, to_group.degree());
    std::vector<DiskMap> transversal;
    for (const Word& r : sd.reps)
        if (to_group.membership(r)) transversal.push_back(poly.eval_disk(r));
    if (static_cast<int>(transversal.size()) != dd)
        throw InvariantError("transfer: coset representatives disagree with the tables");
    auto inner_eval = f.eval;
    int ii = f.i;
    AutomorphicForm out;
    out.i = f.i;
    out.group = to_group;
    out.tail_estimate = f.tail_estimate;
    out.conditionally_convergent = f.conditionally_convergent;
    out.eval = [inner_eval, transversal, ii, dd](Complex z) {
        Complex acc = 0;
        for (const auto& g : transversal) {
            Complex dp = 1;
            for (int k = 0; k < ii; ++k) dp *= g.derivative(z);
            acc += inner_eval(g.apply(z)) * dp;
        }
        return acc / static_cast<double>(dd);
    };
    return out;
}

// --- Petersson pairing ------------------------------------------------------

struct PeterssonEstimate {
    Complex value{0, 0};
    double se = 0;
    long samples = 0;
};

struct SampleGrid {
    std::vector<Complex> points;  // inside the master polygon
    double box_area = 0;          // Lebesgue area of the sampling square
    long raw = 0;                 // raw draws, including rejected ones
};

inline SampleGrid polygon_samples(const FundamentalPolygon& poly, long raw_samples, std::uint64_t seed) {
    double rmax = 0;
    for (const auto& v : poly.vertices) rmax = std::max(rmax, std::abs(v));
    auto rng = seeded_rng(seed, 0x5A11);
    std::uniform_real_distribution<double> ur(-rmax, rmax);
    SampleGrid grid;
    for (long i = 0; i < raw_samples; ++i) {
        Complex z(ur(rng), ur(rng));
        if (std::abs(z) < 1 && poly.contains(z)) grid.points.push_back(z);
    }
    grid.box_area = 4 * rmax * rmax;
    grid.raw = raw_samples;
    return grid;
}

// Normalized L2 pairing <f, g> / degree. The integral over the cover's
// fundamental domain (coset translates of the base polygon) is pulled back
// to base samples through the hyperbolic-invariant pointwise pairing
// f conj(g) rho^{-2i}, then divided by the covering degree, so pullback is
// an isometry.
inline PeterssonEstimate petersson(const AutomorphicForm& f, const AutomorphicForm& g,
                                   const FundamentalPolygon& poly, const SampleGrid& grid) {
    if (f.i != g.i) throw PreconditionError("petersson: weights differ");
    if (!(f.group == g.group)) throw PreconditionError("petersson: automorphy groups differ");
    if (grid.points.empty()) throw NumericError("petersson: no samples landed in the polygon");
    SchreierData sd = schreier_data(f.group);
    std::vector<DiskMap> reps;
    for (const Word& r : sd.reps) reps.push_back(poly.eval_disk(r));
    int d = f.group.degree();
    double sum_re = 0, sum_im = 0, sq_re = 0, sq_im = 0;
    for (Complex z0 : grid.points) {
        Complex total = 0;
        for (const auto& rep : reps) {
            Complex z = rep.apply(z0);
            double rho = 2.0 / (1.0 - std::norm(z));
            total += f(z) * std::conj(g(z)) * std::pow(rho, -2.0 * f.i);
        }
        Complex contrib = total * disk_area_density(z0);  // d(hyp area) at the base sample
        sum_re += contrib.real();
        sum_im += contrib.imag();
        sq_re += contrib.real() * contrib.real();
        sq_im += contrib.imag() * contrib.imag();
    }
    double nraw = static_cast<double>(grid.raw);
    PeterssonEstimate est;
    est.samples = grid.raw;
    est.value = Complex(sum_re, sum_im) * grid.box_area / nraw / static_cast<double>(d);
    double var_re = std::max(0.0, sq_re / nraw - (sum_re / nraw) * (sum_re / nraw));
    double var_im = std::max(0.0, sq_im / nraw - (sum_im / nraw) * (sum_im / nraw));
    est.se = std::sqrt((var_re + var_im) / nraw) * grid.box_area / static_cast<double>(d);
    return est;
}

// --- Gram matrices and ranks ---------------------------------------------------

struct GramMatrix {
    std::vector<std::vector<Complex>> entries;
    std::vector<std::vector<double>> se;
    double max_se = 0;

    int size() const { return static_cast<int>(entries.size()); }
};

namespace detail {

// values[f][j * nreps + r] over the translated sample points
struct ValueTensor {
    std::vector<std::vector<Complex>> values;
    std::vector<double> metric;        // rho^{-2i} at the translated points
    std::vector<double> base_density;  // hyperbolic area density at base samples
    int nreps = 1;
};

inline ValueTensor evaluate_forms(const std::vector<AutomorphicForm>& forms,
                                  const FundamentalPolygon& poly, const SampleGrid& grid) {
    SchreierData sd = schreier_data(forms[0].group);
    std::vector<DiskMap> reps;
    for (const Word& r : sd.reps) reps.push_back(poly.eval_disk(r));
    long npts = static_cast<long>(grid.points.size());
    int nreps = static_cast<int>(reps.size());
    ValueTensor t;
    t.nreps = nreps;
    t.values.assign(forms.size(), std::vector<Complex>(npts * nreps));
    t.metric.resize(npts * nreps);
    t.base_density.resize(npts);
    for (long j = 0; j < npts; ++j) {
        t.base_density[j] = disk_area_density(grid.points[j]);
        for (int r = 0; r < nreps; ++r) {
            Complex z = reps[r].apply(grid.points[j]);
            double rho = 2.0 / (1.0 - std::norm(z));
            t.metric[j * nreps + r] = std::pow(rho, -2.0 * forms[0].i);
            for (size_t a = 0; a < forms.size(); ++a) t.values[a][j * nreps + r] = forms[a](z);
        }
    }
    return t;
}

inline void pairing_entry(const ValueTensor& t, const SampleGrid& grid, int degree, int a, int b,
                          Complex& value, double& se) {
    long npts = static_cast<long>(grid.points.size());
    double sum_re = 0, sum_im = 0, sq_re = 0, sq_im = 0;
    for (long j = 0; j < npts; ++j) {
        Complex tot = 0;
        for (int r = 0; r < t.nreps; ++r)
            tot += t.values[a][j * t.nreps + r] * std::conj(t.values[b][j * t.nreps + r]) *
                   t.metric[j * t.nreps + r];
        Complex contrib = tot * t.base_density[j];
        sum_re += contrib.real();
        sum_im += contrib.imag();
        sq_re += contrib.real() * contrib.real();
        sq_im += contrib.imag() * contrib.imag();
    }
    double nraw = static_cast<double>(grid.raw);
    value = Complex(sum_re, sum_im) * grid.box_area / nraw / static_cast<double>(degree);
    double var_re = std::max(0.0, sq_re / nraw - (sum_re / nraw) * (sum_re / nraw));
    double var_im = std::max(0.0, sq_im / nraw - (sum_im / nraw) * (sum_im / nraw));
    se = std::sqrt((var_re + var_im) / nraw) * grid.box_area / static_cast<double>(degree);
}

}  // namespace detail

// Pairwise Petersson products with the form values cached once per sample
// point and coset translate.
inline GramMatrix gram_matrix(const std::vector<AutomorphicForm>& forms, const FundamentalPolygon& poly,
                              const SampleGrid& grid) {
    int n = static_cast<int>(forms.size());
    if (n == 0) throw PreconditionError("gram_matrix: no forms");
    for (const auto& f : forms)
        if (!(f.group == forms[0].group) || f.i != forms[0].i)
            throw PreconditionError("gram_matrix: mixed weights or groups");
    detail::ValueTensor t = detail::evaluate_forms(forms, poly, grid);
    int d = forms[0].group.degree();
    GramMatrix g;
    g.entries.assign(n, std::vector<Complex>(n, Complex(0, 0)));
    g.se.assign(n, std::vector<double>(n, 0.0));
    for (int a = 0; a < n; ++a) {
        for (int b = a; b < n; ++b) {
            Complex value;
            double se;
            detail::pairing_entry(t, grid, d, a, b, value, se);
            g.entries[a][b] = value;
            g.entries[b][a] = std::conj(value);
            g.se[a][b] = g.se[b][a] = se;
            g.max_se = std::max(g.max_se, se);
        }
    }
    return g;
}

// eigenvalues of the realified Hermitian matrix (each eigenvalue doubled)
inline std::vector<double> gram_eigenvalues(const GramMatrix& g) {
    int n = g.size();
    std::vector<std::vector<double>> re(2 * n, std::vector<double>(2 * n, 0.0));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            re[a][b] = g.entries[a][b].real();
            re[a][n + b] = -g.entries[a][b].imag();
            re[n + a][b] = g.entries[a][b].imag();
            re[n + a][n + b] = g.entries[a][b].real();
        }
    std::vector<double> ev;
    std::vector<std::vector<double>> vec;
    jacobi_eigen(re, ev, vec);
    return ev;  // ascending, doubled multiplicities
}

struct RankReport {
    int numeric_rank = 0;
    int expected = 0;
    bool pass = false;
    bool ill_conditioned = false;
    double threshold = 0;
    std::vector<double> eigenvalues;  // of the realified Gram, ascending
};

// Numeric rank of the Gram matrix with the threshold scaled from the largest
// eigenvalue and lifted to the Monte Carlo noise floor.
inline RankReport rank_check(const std::vector<AutomorphicForm>& forms, const FundamentalPolygon& poly,
                             const SampleGrid& grid, int expected_dim) {
    if (static_cast<int>(forms.size()) < expected_dim + 3)
        throw PreconditionError("rank_check: need at least expected_dim + 3 forms");
    GramMatrix g = gram_matrix(forms, poly, grid);
    std::vector<double> ev = gram_eigenvalues(g);
    double top = ev.empty() ? 0 : std::abs(ev.back());
    double threshold = std::max(top * 1e-6, 10.0 * g.max_se);
    int count = 0;
    for (double v : ev)
        if (v > threshold) ++count;
    RankReport rep;
    rep.numeric_rank = count / 2;  // realification doubles
    rep.expected = expected_dim;
    rep.pass = rep.numeric_rank == expected_dim;
    rep.threshold = threshold;
    rep.eigenvalues = ev;
    // spectral gap at the cut
    double below = 0, above = top;
    for (double v : ev) {
        if (v <= threshold) below = std::max(below, v);
        if (v > threshold) {
            above = v;
            break;
        }
    }
    rep.ill_conditioned = (above - below) < 10.0 * g.max_se;
    return rep;
}

// Riemann-Roch dimension of holomorphic i-forms in genus g.
inline int form_space_dimension(int genus, int i) {
    if (i == 0) return 1;
    if (i == 1) return genus;
    return (2 * i - 1) * (genus - 1);
}

// --- Galois (deck) action -------------------------------------------------------

struct GaloisActionReport {
    std::vector<std::vector<Complex>> action;  // matrix of the deck action in the sampled basis
    double nontriviality = 0;                  // operator-norm distance from the identity
    double minus_one_residual = 1;             // residual of the constructed -1 eigenvector
    double power_identity_residual = 1;        // |A^k - I| for the deck order k
    bool pass_nontrivial = false;
};

namespace detail {

inline std::vector<std::vector<Complex>> complex_solve(std::vector<std::vector<Complex>> a,
                                                       std::vector<std::vector<Complex>> b) {
    int n = static_cast<int>(a.size());
    int m = static_cast<int>(b[0].size());
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) < 1e-300) throw NumericError("galois: singular Gram matrix");
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            Complex f = a[r][col] / a[col][col];
            for (int c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            for (int c = 0; c < m; ++c) b[r][c] -= f * b[col][c];
        }
    }
    std::vector<std::vector<Complex>> x(n, std::vector<Complex>(m));
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < m; ++c) x[r][c] = b[r][c] / a[r][r];
    return x;
}

inline std::vector<std::vector<Complex>> mat_mul(const std::vector<std::vector<Complex>>& a,
                                                 const std::vector<std::vector<Complex>>& b) {
    int n = static_cast<int>(a.size());
    std::vector<std::vector<Complex>> c(n, std::vector<Complex>(n, Complex(0, 0)));
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
    return c;
}

inline double mat_dist_identity(const std::vector<std::vector<Complex>>& a) {
    int n = static_cast<int>(a.size());
    double s = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Complex d = a[i][j] - (i == j ? Complex(1, 0) : Complex(0, 0));
            s += std::norm(d);
        }
    return std::sqrt(s);
}

}  // namespace detail

// The deck transformation of a normal cover acts on the sampled form space
// by weight-twisted precomposition; the matrix is recovered through Gram
// projections on a pivoted well-conditioned sub-basis (sampled series can
// be nearly dependent). For an order-two deck the -1 eigenvector is
// produced exactly as (A - I) w.
inline GaloisActionReport galois_action_check(const std::vector<AutomorphicForm>& basis,
                                              const Word& deck_word, int deck_order,
                                              const FundamentalPolygon& poly, const SampleGrid& grid) {
    if (basis.empty()) throw PreconditionError("galois_action_check: empty basis");
    const CosetTable& h = basis[0].group;
    if (h.membership(deck_word))
        throw PreconditionError("galois_action_check: deck word lies in the cover subgroup");
    // table of (deck) H (deck)^-1: the action re-based at 0 . deck^-1
    if (h.canonical(h.trace(0, inverse(deck_word))) != h)
        throw PreconditionError("galois_action_check: deck word does not normalize the cover");

    DiskMap delta = poly.eval_disk(deck_word);
    DiskMap delta_inv = delta.inverse();
    int i = basis[0].i;

    // close the sampled family under the deck orbit; the action then
    // permutes the family, so its matrix is structural rather than an
    // artifact of series quality
    int nb = static_cast<int>(basis.size());
    std::vector<AutomorphicForm> all = basis;
    for (int j = 1; j < deck_order; ++j) {
        for (int m = 0; m < nb; ++m) {
            auto inner = all[(j - 1) * nb + m].eval;
            AutomorphicForm g = basis[m];
            g.eval = [inner, delta_inv, i](Complex z) {
                Complex dp = 1;
                for (int k = 0; k < i; ++k) dp *= delta_inv.derivative(z);
                return inner(delta_inv.apply(z)) * dp;
            };
            all.push_back(g);
        }
    }
    int total = static_cast<int>(all.size());
    // index of delta . (orbit member a)
    auto moved_index = [&](int a) {
        int j = a / nb, m = a % nb;
        return ((j + 1) % deck_order) * nb + m;
    };
    detail::ValueTensor tensor = detail::evaluate_forms(all, poly, grid);
    int d = h.degree();
    auto pair_of = [&](int a, int b) {
        Complex v;
        double se;
        detail::pairing_entry(tensor, grid, d, a, b, v, se);
        return std::make_pair(v, se);
    };

    std::vector<std::vector<Complex>> gram(total, std::vector<Complex>(total));
    double max_se = 0;
    for (int a = 0; a < total; ++a)
        for (int b = a; b < total; ++b) {
            auto [v, se] = pair_of(a, b);
            gram[a][b] = v;
            gram[b][a] = std::conj(v);
            max_se = std::max(max_se, se);
        }

    // pivoted Cholesky selection of a well-conditioned sub-basis
    std::vector<int> selected;
    {
        std::vector<std::vector<Complex>> r = gram;
        std::vector<bool> used(total, false);
        double top = 0;
        for (int a = 0; a < total; ++a) top = std::max(top, std::abs(r[a][a]));
        double floor_val = std::max(top * 1e-4, 10 * max_se);
        for (int step = 0; step < total; ++step) {
            int piv = -1;
            double best = floor_val;
            for (int a = 0; a < total; ++a)
                if (!used[a] && r[a][a].real() > best) {
                    best = r[a][a].real();
                    piv = a;
                }
            if (piv < 0) break;
            used[piv] = true;
            selected.push_back(piv);
            for (int a = 0; a < total; ++a) {
                if (used[a]) continue;
                Complex f = r[a][piv] / r[piv][piv];
                for (int b = 0; b < total; ++b) r[a][b] -= f * r[piv][b];
                r[a][piv] = 0;
            }
        }
    }
    int n = static_cast<int>(selected.size());
    if (n == 0) throw NumericError("galois_action_check: degenerate sampled basis");

    std::vector<std::vector<Complex>> g_sub(n, std::vector<Complex>(n)), mixed(n, std::vector<Complex>(n));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            g_sub[a][b] = gram[selected[a]][selected[b]];
            mixed[a][b] = gram[moved_index(selected[a])][selected[b]];
        }
    // delta f_a = sum_c A[c][a] f_c  =>  mixed[a][b] = sum_c A[c][a] g_sub[c][b]
    std::vector<std::vector<Complex>> gt(n, std::vector<Complex>(n)), mt(n, std::vector<Complex>(n));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            gt[a][b] = g_sub[b][a];
            mt[a][b] = mixed[b][a];
        }
    std::vector<std::vector<Complex>> x = detail::complex_solve(gt, mt);
    GaloisActionReport rep;
    rep.action.assign(n, std::vector<Complex>(n));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) rep.action[a][b] = x[a][b];

    rep.nontriviality = detail::mat_dist_identity(rep.action);
    rep.pass_nontrivial = rep.nontriviality > 10.0 * max_se;

    // power law A^k = I
    std::vector<std::vector<Complex>> pw(n, std::vector<Complex>(n, Complex(0, 0)));
    for (int d = 0; d < n; ++d) pw[d][d] = 1;
    for (int k = 0; k < deck_order; ++k) pw = detail::mat_mul(pw, rep.action);
    rep.power_identity_residual = detail::mat_dist_identity(pw);

    if (deck_order == 2) {
        // u = (A - I) w is an exact -1 eigenvector when A^2 = I
        std::vector<Complex> w(n);
        for (int d = 0; d < n; ++d) w[d] = Complex(1.0 / (1 + d), 0.3 * d);
        std::vector<Complex> u(n, Complex(0, 0));
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < n; ++c) u[r] += rep.action[r][c] * w[c];
            u[r] -= w[r];
        }
        double nu = 0;
        for (auto& v : u) nu += std::norm(v);
        nu = std::sqrt(nu);
        if (nu > 1e-12) {
            std::vector<Complex> au(n, Complex(0, 0));
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < n; ++c) au[r] += rep.action[r][c] * u[c];
            double res = 0;
            for (int r = 0; r < n; ++r) res += std::norm(au[r] + u[r]);
            rep.minus_one_residual = std::sqrt(res) / nu;
        }
    }
    return rep;
}

// --- bundle bookkeeping -----------------------------------------------------------

struct FiberStratum {
    std::string label;
    int degree = 1;
    int genus = 2;
    int dim = 0;
};

struct FiberArrow {
    int from = 0, to = 0;  // indices into strata
    bool is_transfer = false;
};

// Symbolic fiber of the inductive-limit i-forms bundle at a point: strata
// with Riemann-Roch dimensions, pullback arrows up the tower, transfer
// arrows back down, and the pullback-then-transfer identity edges that
// realize the projective-limit inclusion.
struct FiberDescriptor {
    int i = 1;
    std::vector<FiberStratum> strata;
    std::vector<FiberArrow> pullback_arrows;
    std::vector<FiberArrow> transfer_arrows;
};

inline FiberDescriptor bundle_bookkeeping(const SurfaceGroupPresentation& p, int i, int max_index,
                                          const EnumLimits& limits = {}) {
    FiberDescriptor d;
    d.i = i;
    auto subs = enumerate_subgroups(p, max_index, limits);
    for (size_t k = 0; k < subs.size(); ++k) {
        FiberStratum s;
        s.degree = subs[k].degree();
        s.genus = subs[k].derived_genus();
        s.dim = form_space_dimension(s.genus, i);
        s.label = "H" + std::to_string(k);
        d.strata.push_back(s);
    }
    for (size_t a = 0; a < subs.size(); ++a) {
        for (size_t b = 0; b < subs.size(); ++b) {
            if (a == b) continue;
            if (subgroup_contains(subs[a], subs[b])) {
                d.pullback_arrows.push_back({static_cast<int>(a), static_cast<int>(b), false});
                d.transfer_arrows.push_back({static_cast<int>(b), static_cast<int>(a), true});
            }
        }
    }
    return d;
}

}  // namespace commensurate
