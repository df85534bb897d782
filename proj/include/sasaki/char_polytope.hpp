#pragma once

#include "sasaki/cone.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sasaki {

/// Facet tags used in chart H-representations: cone facet A gets tag A >= 0,
/// the i-th simple-root wall gets tag -(i+2); -1 stays untagged.
inline int wall_tag(std::size_t wall_index) { return -(static_cast<int>(wall_index) + 2); }
inline bool is_wall_tag(int tag) { return tag <= -2; }

/// Affine chart of the characteristic hyperplane {l_xi = 1}: coordinate k
/// is eliminated, the rest are kept verbatim. dsigma_c is the Lebesgue
/// measure of these chart coordinates.
struct HyperplaneChart {
    std::size_t k = 0;   // eliminated ambient coordinate (0-based)
    std::size_t dim = 0; // r
    Vec xi;

    Vec to_chart(const Vec& y) const {
        Vec t;
        t.reserve(dim);
        for (std::size_t i = 0; i < y.size(); ++i)
            if (i != k) t.push_back(y[i]);
        return t;
    }

    Vec to_ambient(const Vec& t) const {
        Vec y(dim + 1);
        Rational rest(0);
        std::size_t j = 0;
        for (std::size_t i = 0; i <= dim; ++i) {
            if (i == k) continue;
            y[i] = t[j++];
            rest += xi[i] * y[i];
        }
        y[k] = (Rational(1) - rest) / xi[k];
        return y;
    }

    /// Chart form of an ambient affine function y -> u . y + c.
    LinearInequality pull_back(const Vec& u, const Rational& c, int tag) const {
        Vec normal(dim);
        std::size_t j = 0;
        for (std::size_t i = 0; i <= dim; ++i) {
            if (i == k) continue;
            normal[j++] = u[i] - u[k] * xi[i] / xi[k];
        }
        return LinearInequality{normal, c + u[k] / xi[k], tag};
    }
};

/// The characteristic polytope P, its positive part, and the projected
/// (and Fano-translated) polytope on the gamma-orthogonal subspace, all in
/// exact coordinates.
struct CharPolytope {
    MomentCone cone;
    Vec xi;
    Vec gamma;              // projection functional (usually gamma_0)
    Rational gamma_of_xi{0};

    HyperplaneChart chart;
    HPolytope cal_p;        // P in chart coordinates
    VPolytope cal_p_verts;
    HPolytope cal_p_plus;   // P intersected with the positive chamber
    VPolytope cal_p_plus_verts;

    // x-side basis of a' = ker(gamma) and the dual covector basis on
    // gamma-perp; v-coordinates of a point v in gamma-perp are v(b_i)
    std::vector<Vec> x_basis;     // b_i in a
    std::vector<Vec> v_dual_basis; // c_i in a^*, c_i(b_j) = delta_ij, <c_i,gamma> = 0
    Mat v_gram;                    // <c_i, c_j>
    Mat v_gram_inv;

    std::vector<Vec> facet_normals_v; // u'_A in x-basis coordinates
    Vec facet_offsets;                // lambda_A
    std::vector<FacetMeta> meta;

    HPolytope proj;         // P = iota*(calP) in v-coordinates
    VPolytope proj_verts;
    HPolytope proj_plus;
    VPolytope proj_plus_verts;

    Vec iota_project(const Vec& ambient_y) const {
        Vec v(x_basis.size());
        for (std::size_t i = 0; i < x_basis.size(); ++i) v[i] = dot(ambient_y, x_basis[i]);
        return v;
    }

    /// Point of gamma-perp (ambient coordinates) with the given v-coordinates.
    Vec v_to_ambient(const Vec& v) const {
        Vec y = zero_vec(gamma.size());
        for (std::size_t i = 0; i < v.size(); ++i) y = add(y, scale(v[i], v_dual_basis[i]));
        return y;
    }

    /// Inverse of iota* back onto the characteristic hyperplane.
    Vec iota_inverse(const Vec& v) const {
        const Vec point = v_to_ambient(v);
        const Rational v_of_xi = dot(point, xi);
        return add(point, scale((Rational(1) - v_of_xi) / gamma_of_xi, gamma));
    }

    /// Coefficient vector of the linear form v -> <y, v> on v-coordinates.
    Vec form_to_v(const Vec& y) const {
        Vec w(v_dual_basis.size());
        for (std::size_t j = 0; j < v_dual_basis.size(); ++j) w[j] = cone.datum.pair_dual(y, v_dual_basis[j]);
        return w;
    }

    std::size_t dim() const { return chart.dim; }
};

namespace detail {

inline void dedupe_inequalities(HPolytope& h) {
    std::set<Vec> seen;
    std::vector<LinearInequality> out;
    for (const auto& ineq : h.inequalities) {
        Vec joint = ineq.normal;
        joint.push_back(ineq.offset);
        joint = primitive(joint);
        if (seen.insert(joint).second) out.push_back(ineq);
    }
    h.inequalities = std::move(out);
}

} // namespace detail

/// Default chart eliminates the coordinate with the largest |xi^k|
/// (largest index on ties). An override must have xi^k != 0.
inline std::size_t default_chart_index(const Vec& xi) {
    std::size_t k = 0;
    Rational best(-1);
    for (std::size_t i = 0; i < xi.size(); ++i) {
        const Rational a = rational_abs(xi[i]);
        if (a >= best) { best = a; k = i; }
    }
    return k;
}

/// Builds the characteristic polytope for a validated cone and interior
/// Reeb vector, projected along gamma. Unboundedness (xi outside the open
/// dual cone) is rejected with the violating ray in the message.
inline CharPolytope characteristic_polytope(const MomentCone& cone, const Vec& xi, const Vec& gamma,
                                            std::optional<std::size_t> chart_override = std::nullopt) {
    const auto& datum = cone.datum;
    if (xi.size() != datum.rank) throw Error("xi has wrong dimension");
    center_coordinates(datum, xi); // membership check: xi must be central
    if (const auto ray = violating_ray(cone, xi))
        throw Error("characteristic polytope is unbounded: Reeb vector pairs nonpositively with ray " +
                    detail::vec_to_string(*ray));

    CharPolytope cp;
    cp.cone = cone;
    cp.xi = xi;
    cp.gamma = gamma;
    cp.gamma_of_xi = dot(gamma, xi);
    if (cp.gamma_of_xi == 0) throw Error("gamma(xi) = 0");

    cp.chart.k = chart_override.value_or(default_chart_index(xi));
    if (cp.chart.k >= datum.rank || xi[cp.chart.k] == 0)
        throw Error("invalid chart index: xi^k must be nonzero");
    cp.chart.dim = datum.rank - 1;
    cp.chart.xi = xi;

    cp.cal_p.dim = cp.chart.dim;
    for (std::size_t a = 0; a < cone.normals.size(); ++a)
        cp.cal_p.inequalities.push_back(cp.chart.pull_back(cone.normals[a], Rational(0), static_cast<int>(a)));
    detail::dedupe_inequalities(cp.cal_p);
    cp.cal_p_verts = vertex_enumeration(cp.cal_p);
    if (cp.cal_p_verts.vertices.empty()) throw Error("characteristic polytope is empty");

    cp.cal_p_plus = cp.cal_p;
    for (std::size_t i = 0; i < datum.simple_roots.size(); ++i)
        cp.cal_p_plus.inequalities.push_back(
            cp.chart.pull_back(datum.sharp(datum.simple_roots[i]), Rational(0), wall_tag(i)));
    cp.cal_p_plus_verts = vertex_enumeration(cp.cal_p_plus);

    // kernel basis of gamma on the x side
    cp.x_basis = nullspace(Mat{gamma});
    if (cp.x_basis.size() != datum.rank - 1) throw Error("gamma must be a nonzero covector");
    // dual covector basis inside gamma-perp
    {
        const std::size_t r = cp.x_basis.size();
        Mat system = zero_mat(r + 1, datum.rank);
        for (std::size_t j = 0; j < r; ++j)
            for (std::size_t i = 0; i < datum.rank; ++i) system[j][i] = cp.x_basis[j][i];
        const Vec g_gamma = mat_vec(datum.gram, gamma);
        for (std::size_t i = 0; i < datum.rank; ++i) system[r][i] = g_gamma[i];
        for (std::size_t i = 0; i < r; ++i) {
            Vec rhs = zero_vec(r + 1);
            rhs[i] = 1;
            const auto c = solve(system, rhs);
            if (!c) throw Error("failed to build the dual basis of gamma-perp");
            cp.v_dual_basis.push_back(*c);
        }
        cp.v_gram = zero_mat(r, r);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < r; ++j)
                cp.v_gram[i][j] = datum.pair_dual(cp.v_dual_basis[i], cp.v_dual_basis[j]);
        cp.v_gram_inv = *inverse(cp.v_gram);
    }

    cp.meta = facet_meta(cone, gamma, xi);
    cp.proj.dim = cp.x_basis.size();
    for (std::size_t a = 0; a < cone.normals.size(); ++a) {
        const Rational lambda = cp.meta[a].lambda;
        const Vec u_prime = sub(cone.normals[a], scale(lambda, xi)); // in ker(gamma)
        // coordinates of u'_A over the x-basis
        Mat basis_cols = zero_mat(datum.rank, cp.x_basis.size());
        for (std::size_t i = 0; i < datum.rank; ++i)
            for (std::size_t j = 0; j < cp.x_basis.size(); ++j) basis_cols[i][j] = cp.x_basis[j][i];
        const auto coords = solve(basis_cols, u_prime);
        if (!coords) throw Error("facet normal leaves ker(gamma)");
        cp.facet_normals_v.push_back(*coords);
        cp.facet_offsets.push_back(lambda);
        cp.proj.inequalities.push_back(LinearInequality{*coords, lambda, static_cast<int>(a)});
    }
    detail::dedupe_inequalities(cp.proj);
    cp.proj_verts = vertex_enumeration(cp.proj);

    cp.proj_plus = cp.proj;
    for (std::size_t i = 0; i < datum.simple_roots.size(); ++i) {
        const Vec wall = cp.form_to_v(datum.simple_roots[i]);
        cp.proj_plus.inequalities.push_back(LinearInequality{wall, Rational(0), wall_tag(i)});
    }
    cp.proj_plus_verts = vertex_enumeration(cp.proj_plus);
    return cp;
}

/// Rebuilds the projected-side data in a new basis b'_i = sum_j m[i][j] b_j
/// of ker(gamma). All verdicts and functionals must be invariant under
/// this change; used by the invariance test suites.
inline CharPolytope with_x_basis_change(const CharPolytope& cp, const Mat& m) {
    const auto minv = inverse(m);
    if (!minv) throw Error("x-basis change must be invertible");
    CharPolytope out = cp;
    const std::size_t r = cp.x_basis.size();
    out.x_basis.clear();
    for (std::size_t i = 0; i < r; ++i) {
        Vec b = zero_vec(cp.gamma.size());
        for (std::size_t j = 0; j < r; ++j) b = add(b, scale(m[i][j], cp.x_basis[j]));
        out.x_basis.push_back(std::move(b));
    }
    // points transform by m, linear-form coefficient vectors by m^{-T}
    const Mat mt_inv = transpose(*minv);
    auto map_point = [&](const Vec& v) { return mat_vec(m, v); };
    auto map_form = [&](const Vec& d) { return mat_vec(mt_inv, d); };
    out.v_dual_basis.clear();
    for (std::size_t i = 0; i < r; ++i) {
        Vec c = zero_vec(cp.gamma.size());
        for (std::size_t j = 0; j < r; ++j) c = add(c, scale((*minv)[j][i], cp.v_dual_basis[j]));
        out.v_dual_basis.push_back(std::move(c));
    }
    out.v_gram = zero_mat(r, r);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j)
            out.v_gram[i][j] = cp.cone.datum.pair_dual(out.v_dual_basis[i], out.v_dual_basis[j]);
    out.v_gram_inv = *inverse(out.v_gram);
    out.facet_normals_v.clear();
    for (const auto& d : cp.facet_normals_v) out.facet_normals_v.push_back(map_form(d));
    auto map_h = [&](HPolytope h) {
        for (auto& ineq : h.inequalities) ineq.normal = map_form(ineq.normal);
        for (auto& eq : h.equalities) eq.normal = map_form(eq.normal);
        return h;
    };
    auto map_v = [&](VPolytope v) {
        for (auto& p : v.vertices) p = map_point(p);
        std::sort(v.vertices.begin(), v.vertices.end(), lex_less);
        return v;
    };
    out.proj = map_h(cp.proj);
    out.proj_plus = map_h(cp.proj_plus);
    out.proj_verts = map_v(cp.proj_verts);
    out.proj_plus_verts = map_v(cp.proj_plus_verts);
    return out;
}

/// Fano translation P' = P + iota*(gamma_0)/(n+1). The resulting offsets
/// must equal (1 - 2 sigma_A(u_A))/(n+1) exactly; with gamma = gamma_0 the
/// shift vanishes and P' = P.
inline CharPolytope translate_fano(const CharPolytope& cp, const Vec& gamma0) {
    const auto& datum = cp.cone.datum;
    const long n = datum.n;
    CharPolytope out = cp;
    Vec shift(cp.x_basis.size());
    for (std::size_t i = 0; i < cp.x_basis.size(); ++i)
        shift[i] = dot(gamma0, cp.x_basis[i]) / Rational(n + 1);

    auto translate = [&](HPolytope& h) {
        for (auto& ineq : h.inequalities) ineq.offset += dot(ineq.normal, shift);
    };
    auto translate_verts = [&](VPolytope& v) {
        for (auto& p : v.vertices) p = add(p, shift);
        std::sort(v.vertices.begin(), v.vertices.end(), lex_less);
    };
    translate(out.proj);
    translate(out.proj_plus);
    translate_verts(out.proj_verts);
    translate_verts(out.proj_plus_verts);
    for (std::size_t a = 0; a < out.facet_offsets.size(); ++a) {
        out.facet_offsets[a] += dot(out.facet_normals_v[a], shift);
        const Rational expected = (Rational(1) - 2 * cp.meta[a].sigma_a_of_u) / Rational(n + 1);
        if (out.facet_offsets[a] != expected)
            throw Error("Fano translation produced offset " + out.facet_offsets[a].str() +
                        " on facet " + std::to_string(a) + ", expected " + expected.str());
        // on P' the facet constants become lambda'_A = (1-2 sigma_A(u_A))/(n+1),
        // hence Lambda_A = 2(n+1) uniformly
        out.meta[a].lambda = out.facet_offsets[a];
        if (out.meta[a].lambda <= 0)
            throw Error("translated polytope does not contain the origin (facet " + std::to_string(a) + ")");
        out.meta[a].big_lambda =
            Rational(2) / out.meta[a].lambda * (Rational(1) - 2 * out.meta[a].sigma_a_of_u);
        if (out.meta[a].big_lambda != Rational(2 * (n + 1)))
            throw Error("Lambda_A != 2(n+1) on the translated polytope");
    }
    return out;
}

} // namespace sasaki
