#pragma once

#include "sasaki/rational.hpp"

#include <cstddef>
#include <vector>

namespace sasaki {

using IntMat = std::vector<std::vector<Integer>>;

struct SmithForm {
    IntMat u;                       // unimodular, rows
    IntMat d;                       // diagonal, d = u * m * v
    IntMat v;                       // unimodular, columns
    std::vector<Integer> divisors;  // nonzero elementary divisors, d1 | d2 | ...
};

namespace detail {

inline IntMat int_identity(std::size_t n) {
    IntMat m(n, std::vector<Integer>(n, 0));
    for (std::size_t i = 0; i < n; ++i) m[i][i] = 1;
    return m;
}

} // namespace detail

/// Smith normal form of an integer matrix: U*M*V = D with U, V unimodular
/// and D diagonal with successive divisibility.
inline SmithForm smith_normal_form(IntMat m) {
    const std::size_t rows = m.size();
    const std::size_t cols = rows ? m[0].size() : 0;
    SmithForm s;
    s.u = detail::int_identity(rows);
    s.v = detail::int_identity(cols);

    auto swap_rows = [&](std::size_t a, std::size_t b) {
        std::swap(m[a], m[b]);
        std::swap(s.u[a], s.u[b]);
    };
    auto swap_cols = [&](std::size_t a, std::size_t b) {
        for (auto& row : m) std::swap(row[a], row[b]);
        for (auto& row : s.v) std::swap(row[a], row[b]);
    };
    auto add_row = [&](std::size_t dst, std::size_t src, const Integer& f) {
        for (std::size_t j = 0; j < cols; ++j) m[dst][j] += f * m[src][j];
        for (std::size_t j = 0; j < rows; ++j) s.u[dst][j] += f * s.u[src][j];
    };
    auto add_col = [&](std::size_t dst, std::size_t src, const Integer& f) {
        for (std::size_t i = 0; i < rows; ++i) m[i][dst] += f * m[i][src];
        for (std::size_t i = 0; i < cols; ++i) s.v[i][dst] += f * s.v[i][src];
    };
    auto negate_row = [&](std::size_t i) {
        for (auto& x : m[i]) x = -x;
        for (auto& x : s.u[i]) x = -x;
    };

    const std::size_t steps = std::min(rows, cols);
    for (std::size_t k = 0; k < steps; ++k) {
        bool settled = false;
        while (!settled) {
            // nonzero pivot of minimal absolute value
            bool found = false;
            std::size_t pi = k, pj = k;
            Integer best(0);
            for (std::size_t i = k; i < rows; ++i)
                for (std::size_t j = k; j < cols; ++j) {
                    if (m[i][j] == 0) continue;
                    Integer a = abs(m[i][j]);
                    if (!found || a < best) { found = true; best = a; pi = i; pj = j; }
                }
            if (!found) { settled = true; break; }
            swap_rows(k, pi);
            swap_cols(k, pj);
            if (m[k][k] < 0) negate_row(k);

            bool again = true;
            while (again) {
                again = false;
                for (std::size_t i = k + 1; i < rows; ++i) {
                    if (m[i][k] == 0) continue;
                    Integer q = m[i][k] / m[k][k];
                    add_row(i, k, -q);
                    if (m[i][k] != 0) { swap_rows(i, k); if (m[k][k] < 0) negate_row(k); again = true; }
                }
                for (std::size_t j = k + 1; j < cols; ++j) {
                    if (m[k][j] == 0) continue;
                    Integer q = m[k][j] / m[k][k];
                    add_col(j, k, -q);
                    if (m[k][j] != 0) { swap_cols(j, k); again = true; }
                }
            }
            // pivot must divide the remaining block; if not, merge the
            // offending row into row k and re-eliminate
            settled = true;
            for (std::size_t i = k + 1; i < rows && settled; ++i)
                for (std::size_t j = k + 1; j < cols; ++j) {
                    if (m[i][j] % m[k][k] != 0) {
                        add_row(k, i, 1);
                        settled = false;
                        break;
                    }
                }
        }
        if (m[k][k] == 0) break;
    }

    s.d = m;
    for (std::size_t k = 0; k < steps; ++k)
        if (m[k][k] != 0) s.divisors.push_back(m[k][k]);
    return s;
}

/// Integer matrix from rational rows after verifying integrality.
inline IntMat to_integer_matrix(const std::vector<std::vector<Rational>>& rows) {
    IntMat m;
    m.reserve(rows.size());
    for (const auto& row : rows) {
        std::vector<Integer> r;
        r.reserve(row.size());
        for (const auto& q : row) {
            if (denominator(q) != 1) throw Error("matrix entry not an integer: " + q.str());
            r.push_back(numerator(q));
        }
        m.push_back(std::move(r));
    }
    return m;
}

} // namespace sasaki
