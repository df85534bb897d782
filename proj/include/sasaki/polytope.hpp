#pragma once

#include "sasaki/simplex_integrate.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <set>
#include <vector>

namespace sasaki {

/// normal . t + offset >= 0 in chart coordinates. `tag` carries the facet
/// identity (cone facet index, wall index, ...) through slicing and
/// triangulation; -1 means untagged.
struct LinearInequality {
    Vec normal;
    Rational offset{0};
    int tag = -1;

    Rational value(const Vec& t) const { return dot(normal, t) + offset; }
};

struct HPolytope {
    std::size_t dim = 0;
    std::vector<LinearInequality> inequalities;
    std::vector<LinearInequality> equalities;
};

struct VPolytope {
    std::vector<Vec> vertices; // deduplicated, lexicographically sorted
};

struct Triangulation {
    std::vector<Simplex> simplices;
    std::size_t dim = 0;     // affine dimension of the covered set
    bool degenerate = false; // affine dimension below the ambient chart dimension

    Rational total_volume() const {
        Rational v(0);
        for (const auto& s : simplices) v += s.volume();
        return v;
    }
};

namespace detail {

inline std::size_t affine_dim(const std::vector<Vec>& points) {
    if (points.size() <= 1) return 0;
    Mat diffs;
    for (std::size_t i = 1; i < points.size(); ++i) diffs.push_back(sub(points[i], points[0]));
    return rank(diffs);
}

inline bool feasible(const HPolytope& h, const Vec& t) {
    for (const auto& e : h.equalities)
        if (e.value(t) != 0) return false;
    for (const auto& i : h.inequalities)
        if (i.value(t) < 0) return false;
    return true;
}

inline void combinations(std::size_t n, std::size_t k, const std::function<void(const std::vector<std::size_t>&)>& fn) {
    if (k > n) return;
    if (k == 0) {
        fn({});
        return;
    }
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    while (true) {
        fn(idx);
        std::size_t i = k;
        while (i > 0) {
            --i;
            if (idx[i] != i + n - k) break;
            if (i == 0) return;
        }
        if (idx[i] == i + n - k) return;
        ++idx[i];
        for (std::size_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

} // namespace detail

/// Exhaustive exact vertex enumeration: every vertex is the unique solution
/// of dim-many tight constraints, so all constraint subsets of the right
/// rank are tried. Deduplicated, sorted lexicographically.
inline VPolytope vertex_enumeration(const HPolytope& h) {
    std::set<Vec> found;
    Mat eq_rows;
    Vec eq_rhs;
    for (const auto& e : h.equalities) {
        eq_rows.push_back(e.normal);
        eq_rhs.push_back(-e.offset);
    }
    const std::size_t eq_rank = eq_rows.empty() ? 0 : rank(eq_rows);
    if (h.dim < eq_rank) throw Error("vertex_enumeration: over-constrained equalities");
    const std::size_t need = h.dim - eq_rank;
    if (need > h.inequalities.size() && need > 0) return {};

    detail::combinations(h.inequalities.size(), need, [&](const std::vector<std::size_t>& subset) {
        Mat a = eq_rows;
        Vec b = eq_rhs;
        for (auto i : subset) {
            a.push_back(h.inequalities[i].normal);
            b.push_back(-h.inequalities[i].offset);
        }
        if (rank(a) != h.dim) return;
        const auto x = solve(a, b);
        if (!x) return;
        if (detail::feasible(h, *x)) found.insert(*x);
    });

    VPolytope v;
    v.vertices.assign(found.begin(), found.end());
    std::sort(v.vertices.begin(), v.vertices.end(), lex_less);
    return v;
}

/// A nonzero direction of recession ({eq = 0, ineq >= 0}), if one exists.
/// Returned primitive; nullopt means the feasible set is bounded.
inline std::optional<Vec> recession_ray(const HPolytope& h) {
    Mat all_rows;
    for (const auto& e : h.equalities) all_rows.push_back(e.normal);
    std::size_t base_rank = all_rows.empty() ? 0 : rank(all_rows);
    // lineality first
    {
        Mat rows = all_rows;
        for (const auto& i : h.inequalities) rows.push_back(i.normal);
        const auto lines = nullspace(rows);
        if (!lines.empty()) return primitive(lines[0]);
    }
    if (h.dim < base_rank + 1) return std::nullopt;
    const std::size_t need = h.dim - base_rank - 1;
    std::optional<Vec> witness;
    detail::combinations(h.inequalities.size(), need, [&](const std::vector<std::size_t>& subset) {
        if (witness) return;
        Mat a = all_rows;
        for (auto i : subset) a.push_back(h.inequalities[i].normal);
        const auto dirs = nullspace(a);
        if (dirs.size() != 1) return;
        for (const Vec& cand : {dirs[0], scale(Rational(-1), dirs[0])}) {
            bool ok = true;
            for (const auto& i : h.inequalities)
                if (dot(i.normal, cand) < 0) { ok = false; break; }
            if (ok && !is_zero(cand)) { witness = primitive(cand); return; }
        }
    });
    return witness;
}

/// Extreme rays of the polyhedral cone {x : n . x >= 0 for all n}
/// (the classical double-description output for a pointed cone).
inline std::vector<Vec> cone_extreme_rays(const std::vector<Vec>& normals, std::size_t dim) {
    std::set<Vec> rays;
    if (dim == 0) return {};
    if (dim == 1) {
        for (const Vec& cand : {Vec{Rational(1)}, Vec{Rational(-1)}}) {
            bool ok = true;
            for (const auto& n : normals)
                if (dot(n, cand) < 0) ok = false;
            if (ok) rays.insert(cand);
        }
    } else {
        detail::combinations(normals.size(), dim - 1, [&](const std::vector<std::size_t>& subset) {
            Mat a;
            for (auto i : subset) a.push_back(normals[i]);
            const auto dirs = nullspace(a);
            if (dirs.size() != 1) return;
            for (const Vec& cand : {dirs[0], scale(Rational(-1), dirs[0])}) {
                bool ok = true;
                for (const auto& n : normals)
                    if (dot(n, cand) < 0) { ok = false; break; }
                if (ok) rays.insert(primitive(cand));
            }
        });
    }
    std::vector<Vec> out(rays.begin(), rays.end());
    std::sort(out.begin(), out.end(), lex_less);
    return out;
}

namespace detail {

inline void triangulate_recursive(const HPolytope& h, const std::vector<Vec>& verts,
                                  std::size_t adim, std::vector<std::vector<Vec>>& out) {
    if (verts.empty()) return;
    if (verts.size() == adim + 1) {
        out.push_back(verts);
        return;
    }
    const Vec apex = *std::min_element(verts.begin(), verts.end(), lex_less);
    // every facet (tight inequality of affine dimension adim-1) not through
    // the apex is triangulated recursively and coned; a facet can be cut out
    // by several listed inequalities, so facets are deduplicated by their
    // vertex sets
    std::set<std::vector<Vec>> seen_facets;
    for (std::size_t i = 0; i < h.inequalities.size(); ++i) {
        const auto& ineq = h.inequalities[i];
        if (ineq.value(apex) == 0) continue;
        std::vector<Vec> on_facet;
        for (const auto& v : verts)
            if (ineq.value(v) == 0) on_facet.push_back(v);
        if (on_facet.empty() || affine_dim(on_facet) + 1 != adim) continue;
        std::vector<Vec> key = on_facet;
        std::sort(key.begin(), key.end(), lex_less);
        if (!seen_facets.insert(key).second) continue;
        HPolytope sub = h;
        sub.equalities.push_back(ineq);
        sub.inequalities.erase(sub.inequalities.begin() + static_cast<std::ptrdiff_t>(i));
        std::vector<std::vector<Vec>> cells;
        triangulate_recursive(sub, on_facet, adim - 1, cells);
        for (auto& cell : cells) {
            cell.push_back(apex);
            out.push_back(std::move(cell));
        }
    }
}

} // namespace detail

/// Fan triangulation from the lexicographically smallest vertex; exact and
/// deterministic. A polytope of lower affine dimension than the chart is
/// covered in its own dimension and flagged degenerate.
inline Triangulation triangulate(const HPolytope& h, const VPolytope& v) {
    Triangulation t;
    if (v.vertices.empty()) return t;
    t.dim = detail::affine_dim(v.vertices);
    t.degenerate = t.dim < h.dim;
    std::vector<std::vector<Vec>> cells;
    detail::triangulate_recursive(h, v.vertices, t.dim, cells);
    for (auto& cell : cells) {
        std::sort(cell.begin(), cell.end(), lex_less);
        t.simplices.push_back(Simplex{std::move(cell)});
    }
    std::sort(t.simplices.begin(), t.simplices.end(), [](const Simplex& a, const Simplex& b) {
        return lex_less_mat(a.vertices, b.vertices);
    });
    return t;
}

/// H-representation recovered from a full-dimensional vertex set, with
/// primitive integer normals; used for H <-> V round-trip checks.
inline std::vector<LinearInequality> hull_inequalities(const std::vector<Vec>& verts, std::size_t dim) {
    std::set<std::pair<Vec, Rational>> canon;
    detail::combinations(verts.size(), dim, [&](const std::vector<std::size_t>& subset) {
        Mat diffs;
        for (std::size_t j = 1; j < subset.size(); ++j)
            diffs.push_back(sub(verts[subset[j]], verts[subset[0]]));
        if (!diffs.empty() && rank(diffs) != dim - 1) return;
        Mat rows = diffs;
        const auto normals = nullspace(rows);
        if (normals.size() != 1) return;
        Vec n = normals[0];
        Rational off = -dot(n, verts[subset[0]]);
        bool all_nonneg = true, all_nonpos = true, some_strict = false;
        for (const auto& v : verts) {
            const Rational val = dot(n, v) + off;
            if (val < 0) all_nonneg = false;
            if (val > 0) all_nonpos = false;
            if (val != 0) some_strict = true;
        }
        if (!some_strict) return;
        if (all_nonpos) { n = scale(Rational(-1), n); off = -off; }
        else if (!all_nonneg) return;
        Vec joint = n;
        joint.push_back(off);
        joint = primitive(joint);
        Vec pn(joint.begin(), joint.end() - 1);
        canon.insert({pn, joint.back()});
    });
    std::vector<LinearInequality> out;
    for (const auto& [n, off] : canon) out.push_back(LinearInequality{n, off, -1});
    return out;
}

} // namespace sasaki
