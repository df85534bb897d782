#pragma once

#include "sasaki/polytope.hpp"
#include "sasaki/roots.hpp"
#include "sasaki/smith.hpp"

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace sasaki {

/// The geometric input: inward facet normals u_A of the moment cone in a.
/// Extreme rays (in a^*) are computed eagerly; everything is immutable.
struct MomentCone {
    GroupDatum datum;
    std::vector<Vec> normals; // u_A
    std::vector<Vec> rays;    // extreme rays of the cone, primitive, sorted
};

/// Per-facet Weyl transport: the element w_A with w_A^{-1}(F_A) outer,
/// sigma_A = w_A(sigma), and the value sigma_A(u_A) entering gamma_0.
struct FacetTransport {
    bool outer = false;
    std::size_t weyl_index = 0;
    Vec sigma_a;           // sigma_A in a^*
    Rational sigma_a_of_u; // sigma_A(u_A)
};

namespace detail {

inline Vec wall_normal(const GroupDatum& d, const Vec& alpha) { return d.sharp(alpha); }

/// Relative-interior point (sum of extreme rays) of
/// {y : u_B.y = 0, u_C.y >= 0, <alpha_i, y> >= 0}; empty cone gives zero.
inline Vec facet_chamber_interior_point(const MomentCone& cone, std::size_t facet) {
    std::vector<Vec> normals;
    normals.push_back(cone.normals[facet]);
    normals.push_back(scale(Rational(-1), cone.normals[facet]));
    for (std::size_t b = 0; b < cone.normals.size(); ++b)
        if (b != facet) normals.push_back(cone.normals[b]);
    for (const auto& alpha : cone.datum.simple_roots) normals.push_back(wall_normal(cone.datum, alpha));
    const auto rays = cone_extreme_rays(normals, cone.datum.rank);
    Vec sum = zero_vec(cone.datum.rank);
    for (const auto& r : rays) sum = add(sum, r);
    return sum;
}

inline std::string vec_to_string(const Vec& v) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i].str();
    os << ")";
    return os.str();
}

} // namespace detail

inline MomentCone make_moment_cone(const GroupDatum& datum, const std::vector<Vec>& normals) {
    MomentCone cone;
    cone.datum = datum;
    cone.normals = normals;
    if (normals.empty()) throw Error("cone.normals is empty");
    for (const auto& u : normals) {
        if (u.size() != datum.rank) throw Error("cone normal has wrong dimension");
        if (is_zero(u)) throw Error("zero cone normal");
    }
    cone.rays = cone_extreme_rays(normals, datum.rank);
    return cone;
}

/// Facet is outer when it meets the open positive Weyl chamber of a^*.
inline std::vector<bool> outer_facets(const MomentCone& cone) {
    std::vector<bool> outer(cone.normals.size(), false);
    for (std::size_t a = 0; a < cone.normals.size(); ++a) {
        const Vec p = detail::facet_chamber_interior_point(cone, a);
        if (is_zero(p)) continue;
        bool strict = true;
        for (const auto& alpha : cone.datum.simple_roots)
            if (cone.datum.pair_dual(alpha, p) <= 0) strict = false;
        outer[a] = strict;
    }
    return outer;
}

/// Assigns to every facet the Weyl element carrying an outer facet onto it
/// (ties broken by lexicographically smallest matrix) and checks that all
/// qualifying elements agree on sigma_A(u_A).
inline std::vector<FacetTransport> facet_transport(const MomentCone& cone) {
    const auto& datum = cone.datum;
    const auto outer = outer_facets(cone);
    std::vector<Vec> primitive_normals;
    primitive_normals.reserve(cone.normals.size());
    for (const auto& u : cone.normals) primitive_normals.push_back(primitive(u));

    std::vector<std::size_t> weyl_order(datum.weyl.size());
    for (std::size_t i = 0; i < weyl_order.size(); ++i) weyl_order[i] = i;
    std::sort(weyl_order.begin(), weyl_order.end(), [&](std::size_t a, std::size_t b) {
        return lex_less_mat(datum.weyl[a].on_dual, datum.weyl[b].on_dual);
    });

    std::vector<FacetTransport> out(cone.normals.size());
    for (std::size_t a = 0; a < cone.normals.size(); ++a) {
        bool assigned = false;
        std::optional<Rational> pairing;
        for (auto wi : weyl_order) {
            const auto& w = datum.weyl[wi];
            // w^{-1} on a is the transpose of the dual action
            const Vec preimage = primitive(mat_vec(transpose(w.on_dual), cone.normals[a]));
            bool maps_to_outer = false;
            for (std::size_t b = 0; b < cone.normals.size(); ++b)
                if (outer[b] && primitive_normals[b] == preimage) maps_to_outer = true;
            if (!maps_to_outer) continue;
            const Vec sigma_a = mat_vec(w.on_dual, datum.sigma);
            const Rational value = dot(sigma_a, cone.normals[a]);
            if (!assigned) {
                out[a].outer = outer[a];
                out[a].weyl_index = wi;
                out[a].sigma_a = sigma_a;
                out[a].sigma_a_of_u = value;
                pairing = value;
                assigned = true;
            } else if (*pairing != value) {
                throw Error("inconsistent Weyl transport on facet " + std::to_string(a) +
                            ": sigma_A(u_A) is not well-defined");
            }
        }
        if (!assigned)
            throw Error("facet " + std::to_string(a) +
                        " is not in the Weyl orbit of any outer facet; cone is not W-invariant");
    }
    return out;
}

struct FaceCheck {
    std::vector<std::size_t> active; // facets containing the face
    std::size_t dim = 0;
    bool simple = true;     // #active facets equals the codimension
    bool unimodular = true; // SNF of the active normals has all divisors 1
    std::vector<Integer> divisors;
};

struct ValidationReport {
    bool c1_primitive = true;
    std::vector<bool> c1_by_facet;
    bool c2_faces = true;
    std::vector<FaceCheck> faces;
    bool apex_checked = false; // only when the cone is simplicial at the apex
    bool apex_unimodular = true;
    bool w_invariant = true;
    bool root_integrality = true;
    bool minimal = true;
    std::vector<std::size_t> redundant_facets;
    bool full_dimensional = true;
    bool pointed = true;
    std::vector<std::string> notes;

    bool good() const {
        return c1_primitive && c2_faces && (!apex_checked || apex_unimodular) && w_invariant &&
               root_integrality && minimal && full_dimensional && pointed;
    }
};

/// Good-cone validation: (C1) primitive normals in the lattice, (C2) every
/// face of positive dimension is simple and its normal span is unimodular
/// over the lattice, W-invariance of the normal set, root integrality
/// alpha(u_A) in Z, minimality and the strict-convexity checks. The apex is
/// tested only when it is the intersection of exactly rank-many facets; a
/// non-simplicial apex carries no manifold point and is skipped.
inline ValidationReport validate_good_cone(const MomentCone& cone) {
    const auto& datum = cone.datum;
    const std::size_t d = cone.normals.size();
    ValidationReport report;

    { // pointed and full-dimensional
        Mat normal_rows;
        for (const auto& u : cone.normals) normal_rows.push_back(u);
        report.pointed = rank(normal_rows) == datum.rank;
        Mat ray_rows;
        for (const auto& r : cone.rays) ray_rows.push_back(r);
        report.full_dimensional = !cone.rays.empty() && rank(ray_rows) == datum.rank;
        if (!report.full_dimensional)
            throw Error("moment cone has empty interior");
    }

    // C1: primitive in the lattice
    report.c1_by_facet.resize(d, false);
    for (std::size_t a = 0; a < d; ++a) {
        bool ok = true;
        try {
            const Vec coords = lattice_coordinates(datum, cone.normals[a]);
            Integer g(0);
            for (const auto& q : coords) {
                if (denominator(q) != 1) { ok = false; break; }
                g = boost::multiprecision::gcd(g, numerator(q));
            }
            if (ok) ok = (g == 1);
        } catch (const Error&) {
            ok = false;
        }
        report.c1_by_facet[a] = ok;
        report.c1_primitive = report.c1_primitive && ok;
    }

    // C2 over all faces of dimension >= 1, enumerated through extreme rays
    {
        std::map<std::vector<std::size_t>, std::vector<Vec>> faces; // active set -> rays on face
        const std::size_t nrays = cone.rays.size();
        for (std::size_t mask = 1; mask < (1u << nrays); ++mask) {
            std::vector<std::size_t> active;
            for (std::size_t a = 0; a < d; ++a) {
                bool vanishes = true;
                for (std::size_t rix = 0; rix < nrays; ++rix)
                    if (mask & (1u << rix))
                        if (dot(cone.normals[a], cone.rays[rix]) != 0) { vanishes = false; break; }
                if (vanishes) active.push_back(a);
            }
            if (active.empty()) continue; // interior of the cone
            std::vector<Vec> on_face;
            for (std::size_t rix = 0; rix < nrays; ++rix) {
                bool in_face = true;
                for (auto a : active)
                    if (dot(cone.normals[a], cone.rays[rix]) != 0) { in_face = false; break; }
                if (in_face) on_face.push_back(cone.rays[rix]);
            }
            faces.emplace(std::move(active), std::move(on_face));
        }
        for (const auto& [active, on_face] : faces) {
            FaceCheck check;
            check.active = active;
            Mat span;
            for (const auto& r : on_face) span.push_back(r);
            check.dim = span.empty() ? 0 : rank(span);
            if (check.dim == 0) continue;
            check.simple = active.size() + check.dim == datum.rank;
            std::vector<Vec> rows;
            for (auto a : active) rows.push_back(lattice_coordinates(datum, cone.normals[a]));
            bool integral = true;
            for (const auto& row : rows)
                for (const auto& q : row)
                    if (denominator(q) != 1) integral = false;
            if (!integral) {
                check.unimodular = false;
            } else {
                const auto snf = smith_normal_form(to_integer_matrix(rows));
                check.divisors = snf.divisors;
                for (const auto& dv : snf.divisors)
                    if (dv != 1 && dv != -1) check.unimodular = false;
            }
            report.c2_faces = report.c2_faces && check.simple && check.unimodular;
            report.faces.push_back(std::move(check));
        }
        // apex: only a simplicial apex is the intersection of rank-many facets
        if (d == datum.rank) {
            report.apex_checked = true;
            std::vector<Vec> rows;
            bool integral = true;
            for (const auto& u : cone.normals) {
                rows.push_back(lattice_coordinates(datum, u));
                for (const auto& q : rows.back())
                    if (denominator(q) != 1) integral = false;
            }
            if (!integral) {
                report.apex_unimodular = false;
            } else {
                const auto snf = smith_normal_form(to_integer_matrix(rows));
                for (const auto& dv : snf.divisors)
                    if (dv != 1 && dv != -1) report.apex_unimodular = false;
            }
        } else {
            report.notes.push_back("apex is the intersection of " + std::to_string(d) +
                                   " facets in rank " + std::to_string(datum.rank) +
                                   "; unimodularity there is not part of the good-cone test");
        }
    }

    // W-invariance of the normal set
    {
        std::set<Vec> normal_set;
        for (const auto& u : cone.normals) normal_set.insert(primitive(u));
        for (const auto& w : datum.weyl)
            for (const auto& u : cone.normals)
                if (!normal_set.count(primitive(mat_vec(w.on_space, u)))) report.w_invariant = false;
    }

    // root integrality alpha(u_A) in Z
    for (const auto& alpha : datum.positive_roots)
        for (const auto& u : cone.normals)
            if (denominator(dot(alpha, u)) != 1) report.root_integrality = false;

    // minimality: removing a facet must change the cone
    for (std::size_t a = 0; a < d; ++a) {
        std::vector<Vec> rest;
        for (std::size_t b = 0; b < d; ++b)
            if (b != a) rest.push_back(cone.normals[b]);
        bool redundant = true;
        if (rest.empty()) {
            redundant = false;
        } else {
            Mat rows;
            for (const auto& u : rest) rows.push_back(u);
            if (!nullspace(rows).empty()) {
                redundant = false; // removing it opens a line
            } else {
                for (const auto& ray : cone_extreme_rays(rest, datum.rank))
                    if (dot(cone.normals[a], ray) < 0) redundant = false;
            }
        }
        if (redundant) {
            report.minimal = false;
            report.redundant_facets.push_back(a);
        }
    }

    return report;
}

/// Reeb cone data: Sigma = interior(C^dual) & a_z as an H-representation in
/// center coordinates, and its Fano slice Sigma_O when gamma_0 is supplied.
struct ReebCone {
    std::vector<Vec> cone_rays;        // extreme rays of C in a^*
    std::vector<Vec> dual_generators;  // generators of C^dual (the facet normals)
    Mat sigma_rows;                    // Sigma = {t : sigma_rows . t > 0} over center_basis
    std::optional<Vec> slice_row;      // gamma_0(z_k) coefficients
    std::optional<Rational> slice_rhs; // = -(n+1)
    std::string note;

    bool contains(const Vec& t_center) const {
        for (const auto& row : sigma_rows)
            if (dot(row, t_center) <= 0) return false;
        return true;
    }
};

inline ReebCone reeb_cone(const MomentCone& cone, const std::optional<Vec>& gamma0 = std::nullopt) {
    const auto& datum = cone.datum;
    ReebCone rc;
    rc.cone_rays = cone.rays;
    for (const auto& u : cone.normals) rc.dual_generators.push_back(primitive(u));
    for (const auto& ray : cone.rays) {
        Vec row(datum.center_basis.size());
        for (std::size_t k = 0; k < datum.center_basis.size(); ++k)
            row[k] = dot(ray, datum.center_basis[k]);
        rc.sigma_rows.push_back(std::move(row));
    }
    if (gamma0) {
        Vec row(datum.center_basis.size());
        for (std::size_t k = 0; k < datum.center_basis.size(); ++k)
            row[k] = dot(*gamma0, datum.center_basis[k]);
        rc.slice_row = row;
        rc.slice_rhs = Rational(-(datum.n + 1));
    } else {
        rc.note = "gamma_0 unavailable; Sigma_O omitted";
    }
    return rc;
}

/// Center coordinates of a vector xi in a_z; errors when xi is off-center.
inline Vec center_coordinates(const GroupDatum& datum, const Vec& xi) {
    Mat cols = zero_mat(datum.rank, datum.center_basis.size());
    for (std::size_t i = 0; i < datum.rank; ++i)
        for (std::size_t k = 0; k < datum.center_basis.size(); ++k) cols[i][k] = datum.center_basis[k][i];
    const auto t = solve(cols, xi);
    if (!t) throw Error("Reeb vector is not in the center a_z");
    return *t;
}

inline bool xi_in_sigma(const MomentCone& cone, const Vec& xi) {
    const Vec t = center_coordinates(cone.datum, xi);
    (void)t;
    for (const auto& ray : cone.rays)
        if (dot(xi, ray) <= 0) return false;
    return true;
}

/// The violated ray certificate for a Reeb vector outside Sigma.
inline std::optional<Vec> violating_ray(const MomentCone& cone, const Vec& xi) {
    for (const auto& ray : cone.rays)
        if (dot(xi, ray) <= 0) return ray;
    return std::nullopt;
}

struct Gamma0 {
    Vec gamma0;                 // in a^*, annihilating a_ss
    std::vector<Rational> residuals; // gamma_0(u_A) + 1 - 2 sigma_A(u_A), all facets
    std::optional<Rational> gamma0_of_xi;
};

/// Solves gamma_0(u_A) = -1 + 2 sigma_A(u_A) over the outer facets inside
/// the annihilator of a_ss (exact least squares) and verifies the remaining
/// facets as residuals, which must vanish identically.
inline Gamma0 solve_gamma0(const MomentCone& cone, const std::optional<Vec>& xi = std::nullopt) {
    const auto& datum = cone.datum;
    const auto transport = facet_transport(cone);

    // basis of the annihilator of a_ss = Gram-orthocomplement of the roots
    Mat root_rows;
    for (const auto& alpha : datum.simple_roots) root_rows.push_back(datum.sharp(alpha));
    std::vector<Vec> zbasis;
    if (root_rows.empty()) {
        for (std::size_t i = 0; i < datum.rank; ++i) {
            Vec e = zero_vec(datum.rank);
            e[i] = 1;
            zbasis.push_back(std::move(e));
        }
    } else {
        zbasis = nullspace(root_rows);
    }

    Mat system;
    Vec rhs;
    for (std::size_t a = 0; a < cone.normals.size(); ++a) {
        if (!transport[a].outer) continue;
        Vec row(zbasis.size());
        for (std::size_t j = 0; j < zbasis.size(); ++j) row[j] = dot(zbasis[j], cone.normals[a]);
        system.push_back(std::move(row));
        rhs.push_back(Rational(-1) + 2 * transport[a].sigma_a_of_u);
    }
    if (system.empty()) throw Error("no outer facets; cannot determine gamma_0");

    // exact least squares via the normal equations, then an exact residual check
    const Mat st = transpose(system);
    const Mat ata = mat_mul(st, system);
    const Vec atb = mat_vec(st, rhs);
    if (rank(ata) < zbasis.size()) {
        const auto kernel = nullspace(system);
        std::string msg = "gamma_0 is underdetermined; kernel directions:";
        for (const auto& k : kernel) {
            Vec ambient = zero_vec(datum.rank);
            for (std::size_t j = 0; j < zbasis.size(); ++j) ambient = add(ambient, scale(k[j], zbasis[j]));
            msg += " " + detail::vec_to_string(ambient);
        }
        throw Error(msg);
    }
    const auto coeff = solve(ata, atb);
    if (!coeff) throw Error("gamma_0 normal equations are singular");

    Gamma0 result;
    result.gamma0 = zero_vec(datum.rank);
    for (std::size_t j = 0; j < zbasis.size(); ++j)
        result.gamma0 = add(result.gamma0, scale((*coeff)[j], zbasis[j]));

    bool clean = true;
    for (std::size_t a = 0; a < cone.normals.size(); ++a) {
        const Rational res =
            dot(result.gamma0, cone.normals[a]) + Rational(1) - 2 * transport[a].sigma_a_of_u;
        result.residuals.push_back(res);
        clean = clean && res == 0;
    }
    if (!clean) {
        std::string msg = "transverse class not proportional to c_1^B: gamma_0 residuals";
        for (const auto& r : result.residuals) msg += " " + r.str();
        throw ObstructionError(msg);
    }
    if (xi) result.gamma0_of_xi = dot(result.gamma0, *xi);
    return result;
}

/// Per-facet constants lambda_A = gamma(u_A)/gamma(xi) and
/// Lambda_A = (2/lambda_A)(1 - 2 sigma_A(u_A)).
struct FacetMeta {
    bool outer = false;
    std::size_t weyl_index = 0;
    Vec sigma_a;
    Rational sigma_a_of_u{0};
    Rational lambda{0};
    Rational big_lambda{0};
};

inline std::vector<FacetMeta> facet_meta(const MomentCone& cone, const Vec& gamma, const Vec& xi) {
    const Rational gxi = dot(gamma, xi);
    if (gxi == 0) throw Error("facet_meta: gamma(xi) = 0");
    const auto transport = facet_transport(cone);
    std::vector<FacetMeta> out;
    out.reserve(cone.normals.size());
    for (std::size_t a = 0; a < cone.normals.size(); ++a) {
        FacetMeta m;
        m.outer = transport[a].outer;
        m.weyl_index = transport[a].weyl_index;
        m.sigma_a = transport[a].sigma_a;
        m.sigma_a_of_u = transport[a].sigma_a_of_u;
        m.lambda = dot(gamma, cone.normals[a]) / gxi;
        if (m.lambda == 0) throw Error("facet_meta: lambda_A = 0 on facet " + std::to_string(a));
        m.big_lambda = Rational(2) / m.lambda * (Rational(1) - 2 * m.sigma_a_of_u);
        out.push_back(std::move(m));
    }
    return out;
}

} // namespace sasaki
