#pragma once

// Small dense numerics: Levenberg-Marquardt least squares with a forward
// difference Jacobian, and a Jacobi eigensolver for symmetric matrices.
// Problem sizes here are tiny (tens of parameters), so simplicity wins.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "commensurate/errors.hpp"

namespace commensurate {

using ResidualFn = std::function<std::vector<double>(const std::vector<double>&)>;

struct LMOptions {
    int max_iter = 300;
    double cost_tol = 1e-24;   // squared-norm target
    double step_tol = 1e-14;
    double lambda0 = 1e-3;
};

namespace detail {

// Solve (A + lambda diag(A)) x = b in place; A symmetric positive-ish.
inline bool solve_damped(std::vector<std::vector<double>> a, std::vector<double> b, double lambda,
                         std::vector<double>& x) {
    int n = static_cast<int>(b.size());
    for (int i = 0; i < n; ++i) a[i][i] += lambda * (a[i][i] > 0 ? a[i][i] : 1.0);
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) < 1e-300) return false;
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (int r = col + 1; r < n; ++r) {
            double f = a[r][col] / a[col][col];
            for (int c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    x.assign(n, 0.0);
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < n; ++c) s -= a[r][c] * x[c];
        x[r] = s / a[r][r];
    }
    return true;
}

}  // namespace detail

inline double squared_norm(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x * x;
    return s;
}

inline std::vector<double> levenberg_marquardt(const ResidualFn& f, std::vector<double> x,
                                               const LMOptions& opts = {}, double* final_cost = nullptr) {
    int n = static_cast<int>(x.size());
    std::vector<double> r = f(x);
    double cost = squared_norm(r);
    double lambda = opts.lambda0;
    for (int iter = 0; iter < opts.max_iter && cost > opts.cost_tol; ++iter) {
        int m = static_cast<int>(r.size());
        std::vector<std::vector<double>> jac(m, std::vector<double>(n));
        for (int j = 0; j < n; ++j) {
            double h = 1e-7 * std::max(1.0, std::abs(x[j]));
            std::vector<double> xp = x;
            xp[j] += h;
            std::vector<double> rp = f(xp);
            for (int i = 0; i < m; ++i) jac[i][j] = (rp[i] - r[i]) / h;
        }
        std::vector<std::vector<double>> jtj(n, std::vector<double>(n, 0.0));
        std::vector<double> jtr(n, 0.0);
        for (int i = 0; i < m; ++i) {
            for (int a = 0; a < n; ++a) {
                jtr[a] += jac[i][a] * r[i];
                for (int b = a; b < n; ++b) jtj[a][b] += jac[i][a] * jac[i][b];
            }
        }
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < a; ++b) jtj[a][b] = jtj[b][a];
        for (double& v : jtr) v = -v;

        bool stepped = false;
        for (int attempt = 0; attempt < 25; ++attempt) {
            std::vector<double> dx;
            if (!detail::solve_damped(jtj, jtr, lambda, dx)) {
                lambda *= 10;
                continue;
            }
            std::vector<double> xn(n);
            double step = 0;
            for (int j = 0; j < n; ++j) {
                xn[j] = x[j] + dx[j];
                step += dx[j] * dx[j];
            }
            std::vector<double> rn = f(xn);
            double cn = squared_norm(rn);
            if (cn < cost) {
                x = xn;
                r = rn;
                cost = cn;
                lambda = std::max(lambda * 0.3, 1e-12);
                stepped = true;
                if (step < opts.step_tol * opts.step_tol) iter = opts.max_iter;
                break;
            }
            lambda *= 10;
            if (lambda > 1e14) break;
        }
        if (!stepped) break;
    }
    if (final_cost) *final_cost = cost;
    return x;
}

// Eigenvalues (ascending) and eigenvectors (columns) of a symmetric matrix.
inline void jacobi_eigen(std::vector<std::vector<double>> a, std::vector<double>& eigvals,
                         std::vector<std::vector<double>>& eigvecs) {
    int n = static_cast<int>(a.size());
    eigvecs.assign(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) eigvecs[i][i] = 1.0;
    for (int sweep = 0; sweep < 200; ++sweep) {
        double off = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += a[i][j] * a[i][j];
        if (off < 1e-26) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                double theta = (a[q][q] - a[p][p]) / (2 * a[p][q]);
                double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
                double c = 1 / std::sqrt(t * t + 1), s = t * c;
                for (int k = 0; k < n; ++k) {
                    double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    double vkp = eigvecs[k][p], vkq = eigvecs[k][q];
                    eigvecs[k][p] = c * vkp - s * vkq;
                    eigvecs[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    eigvals.resize(n);
    for (int i = 0; i < n; ++i) eigvals[i] = a[i][i];
    // sort ascending, permuting eigenvector columns alongside
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int i, int j) { return eigvals[i] < eigvals[j]; });
    std::vector<double> ev(n);
    std::vector<std::vector<double>> vec(n, std::vector<double>(n));
    for (int i = 0; i < n; ++i) {
        ev[i] = eigvals[idx[i]];
        for (int k = 0; k < n; ++k) vec[k][i] = eigvecs[k][idx[i]];
    }
    eigvals = ev;
    eigvecs = vec;
}

// Deterministic per-purpose RNG streams.
inline std::mt19937_64 seeded_rng(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t mixed = seed * 0x9e3779b97f4a7c15ull + stream * 0xbf58476d1ce4e5b9ull + 1;
    return std::mt19937_64(mixed);
}

}  // namespace commensurate
