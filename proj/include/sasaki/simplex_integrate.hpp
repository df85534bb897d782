#pragma once

#include "sasaki/polynomial.hpp"

#include <vector>

namespace sasaki {

/// A d-simplex in chart coordinates, stored as its d+1 vertices.
struct Simplex {
    std::vector<Vec> vertices;

    std::size_t dim() const { return vertices.empty() ? 0 : vertices.size() - 1; }

    /// Chart-Lebesgue volume |det(V_j - V_0)| / d!.
    Rational volume() const {
        const std::size_t d = dim();
        if (d == 0) return Rational(1);
        Mat edges = zero_mat(d, d);
        for (std::size_t j = 1; j <= d; ++j)
            for (std::size_t i = 0; i < d; ++i) edges[j - 1][i] = vertices[j][i] - vertices[0][i];
        Rational dv = det(edges);
        if (dv < 0) dv = -dv;
        Integer f(1);
        for (std::size_t k = 2; k <= d; ++k) f *= Integer(k);
        return dv / Rational(f);
    }
};

namespace detail {

inline Integer factorial(unsigned n) {
    Integer f(1);
    for (unsigned k = 2; k <= n; ++k) f *= Integer(k);
    return f;
}

} // namespace detail

/// Exact integral of a polynomial over a full-dimensional simplex via the
/// barycentric substitution v = V0 + sum_j l_j (V_j - V0) and the Dirichlet
/// moment formula  int_std-simplex prod l_j^{a_j} dl = prod a_j! / (d + sum a_j)!.
inline Rational integrate_poly_simplex(const Polynomial& p, const Simplex& s) {
    const std::size_t d = s.dim();
    if (p.nvars() != s.vertices[0].size()) throw Error("integrate_poly_simplex: arity mismatch");
    if (d == 0) return p.eval(s.vertices[0]); // counting measure on a point

    // jacobian = d! * volume
    Mat edges = zero_mat(d, d);
    for (std::size_t j = 1; j <= d; ++j)
        for (std::size_t i = 0; i < d; ++i) edges[j - 1][i] = s.vertices[j][i] - s.vertices[0][i];
    Rational jac = det(edges);
    if (jac < 0) jac = -jac;
    if (jac == 0) return Rational(0);

    // substitute chart coordinates by affine forms in the barycentric l_j
    std::vector<Polynomial> subs;
    subs.reserve(p.nvars());
    for (std::size_t i = 0; i < p.nvars(); ++i) {
        Vec coeff = zero_vec(d);
        for (std::size_t j = 1; j <= d; ++j) coeff[j - 1] = s.vertices[j][i] - s.vertices[0][i];
        subs.push_back(Polynomial::affine(coeff, s.vertices[0][i]));
    }
    const Polynomial q = p.substitute(subs);

    Rational total(0);
    for (const auto& [e, c] : q.terms()) {
        unsigned deg = 0;
        Rational num(1);
        for (auto a : e) {
            deg += a;
            num *= Rational(detail::factorial(a));
        }
        total += c * num / Rational(detail::factorial(deg + static_cast<unsigned>(d)));
    }
    return total * jac;
}

inline Rational integrate_poly_simplices(const Polynomial& p, const std::vector<Simplex>& cover) {
    Rational s(0);
    for (const auto& cell : cover) s += integrate_poly_simplex(p, cell);
    return s;
}

} // namespace sasaki
