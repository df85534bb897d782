#pragma once

#include "sasaki/rational.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <vector>

namespace sasaki {

// Dense exact linear algebra on small matrices. Everything here is O(n^3)
// Gaussian elimination over the rationals; sizes never exceed a few dozen.

using Vec = std::vector<Rational>;
using Mat = std::vector<Vec>; // row major

inline Vec zero_vec(std::size_t n) { return Vec(n, Rational(0)); }

inline Mat zero_mat(std::size_t rows, std::size_t cols) {
    return Mat(rows, zero_vec(cols));
}

inline Mat identity_mat(std::size_t n) {
    Mat m = zero_mat(n, n);
    for (std::size_t i = 0; i < n; ++i) m[i][i] = 1;
    return m;
}

inline Rational dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw Error("dot: dimension mismatch");
    Rational s(0);
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline Vec add(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw Error("add: dimension mismatch");
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline Vec sub(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw Error("sub: dimension mismatch");
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline Vec scale(const Rational& c, const Vec& a) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = c * a[i];
    return r;
}

inline bool is_zero(const Vec& a) {
    return std::all_of(a.begin(), a.end(), [](const Rational& q) { return q == 0; });
}

inline Vec mat_vec(const Mat& m, const Vec& v) {
    Vec r(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) r[i] = dot(m[i], v);
    return r;
}

inline Mat mat_mul(const Mat& a, const Mat& b) {
    if (a.empty() || b.empty()) return {};
    const std::size_t n = a.size(), k = b.size(), m = b[0].size();
    Mat r = zero_mat(n, m);
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i].size() != k) throw Error("mat_mul: dimension mismatch");
        for (std::size_t j = 0; j < k; ++j) {
            if (a[i][j] == 0) continue;
            for (std::size_t l = 0; l < m; ++l) r[i][l] += a[i][j] * b[j][l];
        }
    }
    return r;
}

inline Mat transpose(const Mat& m) {
    if (m.empty()) return {};
    Mat r = zero_mat(m[0].size(), m.size());
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m[i].size(); ++j) r[j][i] = m[i][j];
    return r;
}

/// Row echelon elimination in place; returns the pivot columns.
inline std::vector<std::size_t> row_reduce(Mat& m) {
    std::vector<std::size_t> pivots;
    if (m.empty()) return pivots;
    const std::size_t rows = m.size(), cols = m[0].size();
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t p = r;
        while (p < rows && m[p][c] == 0) ++p;
        if (p == rows) continue;
        std::swap(m[p], m[r]);
        const Rational inv = Rational(1) / m[r][c];
        for (std::size_t j = c; j < cols; ++j) m[r][j] *= inv;
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == r || m[i][c] == 0) continue;
            const Rational f = m[i][c];
            for (std::size_t j = c; j < cols; ++j) m[i][j] -= f * m[r][j];
        }
        pivots.push_back(c);
        ++r;
    }
    return pivots;
}

inline std::size_t rank(Mat m) { return row_reduce(m).size(); }

inline Rational det(Mat m) {
    const std::size_t n = m.size();
    Rational d(1);
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        while (p < n && m[p][c] == 0) ++p;
        if (p == n) return Rational(0);
        if (p != c) { std::swap(m[p], m[c]); d = -d; }
        d *= m[c][c];
        const Rational inv = Rational(1) / m[c][c];
        for (std::size_t i = c + 1; i < n; ++i) {
            if (m[i][c] == 0) continue;
            const Rational f = m[i][c] * inv;
            for (std::size_t j = c; j < n; ++j) m[i][j] -= f * m[c][j];
        }
    }
    return d;
}

inline std::optional<Mat> inverse(const Mat& m) {
    const std::size_t n = m.size();
    Mat aug = zero_mat(n, 2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) aug[i][j] = m[i][j];
        aug[i][n + i] = 1;
    }
    const auto pivots = row_reduce(aug);
    if (pivots.size() != n || pivots.back() != n - 1) return std::nullopt;
    Mat inv = zero_mat(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) inv[i][j] = aug[i][n + j];
    return inv;
}

/// Solves A x = b. Returns nullopt when inconsistent; when the system is
/// underdetermined, returns the solution with zero free variables.
inline std::optional<Vec> solve(const Mat& a, const Vec& b) {
    if (a.empty()) return is_zero(b) ? std::optional<Vec>(Vec{}) : std::nullopt;
    const std::size_t rows = a.size(), cols = a[0].size();
    Mat aug = zero_mat(rows, cols + 1);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) aug[i][j] = a[i][j];
        aug[i][cols] = b[i];
    }
    const auto pivots = row_reduce(aug);
    for (std::size_t i = pivots.size(); i < rows; ++i)
        if (aug[i][cols] != 0) return std::nullopt;
    if (!pivots.empty() && pivots.back() == cols) return std::nullopt;
    Vec x = zero_vec(cols);
    for (std::size_t i = 0; i < pivots.size(); ++i) x[pivots[i]] = aug[i][cols];
    return x;
}

/// Basis of the right null space of m (columns as unknowns).
inline std::vector<Vec> nullspace(Mat m) {
    if (m.empty()) return {};
    const std::size_t cols = m[0].size();
    const auto pivots = row_reduce(m);
    std::vector<bool> is_pivot(cols, false);
    for (auto c : pivots) is_pivot[c] = true;
    std::vector<Vec> basis;
    for (std::size_t free = 0; free < cols; ++free) {
        if (is_pivot[free]) continue;
        Vec v = zero_vec(cols);
        v[free] = 1;
        for (std::size_t i = 0; i < pivots.size(); ++i) v[pivots[i]] = -m[i][free];
        basis.push_back(std::move(v));
    }
    return basis;
}

inline bool lex_less(const Vec& a, const Vec& b) {
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
        if (a[i] != b[i]) return a[i] < b[i];
    }
    return a.size() < b.size();
}

inline bool lex_less_mat(const Mat& a, const Mat& b) {
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
        if (a[i] != b[i]) return lex_less(a[i], b[i]);
    }
    return a.size() < b.size();
}

/// Scales a rational vector to a primitive integer vector (gcd 1) with the
/// same direction. Zero vectors pass through unchanged.
inline Vec primitive(const Vec& v) {
    Integer lcm_den(1), gcd_num(0);
    for (const auto& q : v) lcm_den = boost::multiprecision::lcm(lcm_den, denominator(q));
    for (const auto& q : v) gcd_num = boost::multiprecision::gcd(gcd_num, Integer(numerator(q) * (lcm_den / denominator(q))));
    if (gcd_num == 0) return v;
    Vec r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) r[i] = v[i] * Rational(lcm_den, gcd_num);
    return r;
}

} // namespace sasaki
