#pragma once

#include "sasaki/char_polytope.hpp"
#include "sasaki/quadrature.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace sasaki {

/// Exact moment data of the positive characteristic polytope. All exact
/// values are ratios of chart-Lebesgue integrals; V_P itself is tagged with
/// the chart. bar is an ambient point of a^*; tilde_bar lives on the
/// projected side in v-coordinates (with an ambient lift in gamma-perp).
struct MomentReport {
    Rational V_P{0};
    Vec bar;                 // bar(calP_+) in a^*
    Vec bar_proj;            // v-coordinates of bar(P_+)
    Vec tilde_bar;           // v-coordinates
    Vec tilde_bar_ambient;   // lift of tilde_bar into gamma-perp in a^*
    Rational barS{0};
    std::size_t chart_k = 0;
    std::string weight = "none";
};

inline double detail_quad_euclid(const std::vector<double>& a, const std::vector<double>& b) {
    double len = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) {
        const double t = a[c] - b[c];
        len += t * t;
    }
    return std::sqrt(len);
}

namespace detail {

/// Cone patches from an apex over the boundary pieces of a polytope: used
/// to evaluate facet integrals of homogeneous integrands as volume
/// integrals:  int_F p <v,nu> dsigma0 = (deg p + r) int_cone(O,F) p dv.
struct FacetPatch {
    std::size_t facet = 0;      // cone facet index
    std::vector<Simplex> cones; // full-dimensional simplices with the apex appended
};

inline std::vector<FacetPatch> build_facet_patches(const HPolytope& h, const Vec& apex,
                                                   const std::vector<FacetMeta>& meta) {
    std::vector<FacetPatch> out;
    for (const auto& ineq : h.inequalities) {
        if (ineq.tag < 0) continue; // walls and untagged rows carry no weight
        const std::size_t a = static_cast<std::size_t>(ineq.tag);
        if (!meta[a].outer) continue;
        HPolytope sub = h;
        sub.equalities.push_back(ineq);
        const auto verts = vertex_enumeration(sub);
        if (verts.vertices.size() < h.dim) continue; // empty or too low-dimensional
        const auto tri = triangulate(sub, verts);
        if (tri.dim + 1 != h.dim && h.dim > 0) continue; // not a genuine facet piece
        if (meta[a].lambda <= 0)
            throw Error("boundary moments need the origin inside P (lambda_A > 0), facet " +
                        std::to_string(a));
        FacetPatch patch;
        patch.facet = a;
        for (const auto& s : tri.simplices) {
            Simplex cone_cell = s;
            cone_cell.vertices.push_back(apex);
            patch.cones.push_back(std::move(cone_cell));
        }
        out.push_back(std::move(patch));
    }
    return out;
}

} // namespace detail

/// Integration-ready view of a characteristic polytope on its hyperplane
/// chart: triangulation of calP_+, cone patches over the outer facets, and
/// the relevant polynomials in chart coordinates.
class MomentEngine {
public:
    explicit MomentEngine(const CharPolytope& cp) : cp_(cp) {
        const auto& datum = cp_.cone.datum;
        const std::size_t r = cp_.dim();
        interior_ = triangulate(cp_.cal_p_plus, cp_.cal_p_plus_verts);
        if (interior_.degenerate)
            throw Error("positive characteristic polytope is lower-dimensional");

        // apex = chart coordinates of gamma / gamma(xi), the preimage of the
        // projected origin
        apex_ = cp_.chart.to_chart(scale(Rational(1) / cp_.gamma_of_xi, datum.sharp(cp_.gamma)));

        pi_ = Polynomial::constant(r, Rational(1));
        for (const auto& alpha : datum.positive_roots) {
            const auto form = ambient_pairing_form(datum.sharp(alpha));
            pi_ = pi_ * form * form;
        }
        for (std::size_t i = 0; i < datum.rank; ++i) {
            Vec e = zero_vec(datum.rank);
            e[i] = 1;
            y_forms_.push_back(ambient_pairing_form(e));
        }
        for (const auto& b : cp_.x_basis) v_forms_.push_back(ambient_pairing_form(b));

        boundary_ = detail::build_facet_patches(cp_.cal_p_plus, apex_, cp_.meta);
    }

    const CharPolytope& polytope() const { return cp_; }
    const Triangulation& interior() const { return interior_; }
    const Polynomial& pi() const { return pi_; }
    std::size_t moment_degree() const { return 2 * cp_.cone.datum.num_positive_roots(); }

    /// Affine chart polynomial of t -> u . y(t) for a fixed u in a.
    Polynomial ambient_pairing_form(const Vec& u) const {
        const auto& chart = cp_.chart;
        const auto ineq = chart.pull_back(u, Rational(0), -1);
        return Polynomial::affine(ineq.normal, ineq.offset);
    }

    Rational integrate_interior(const Polynomial& p) const {
        return integrate_poly_simplices(p, interior_.simplices);
    }

    /// Exact moments: V_P, bar, tilde_bar and the transverse scalar
    /// curvature average barS. Boundary facet integrals are converted to
    /// cone volume integrals by homogeneity about the projected origin.
    MomentReport moments() const {
        const auto& datum = cp_.cone.datum;
        const std::size_t r = cp_.dim();
        const unsigned m = static_cast<unsigned>(moment_degree());
        MomentReport report;
        report.chart_k = cp_.chart.k;
        report.V_P = integrate_interior(pi_);
        if (report.V_P <= 0) throw Error("V_P must be positive; calP_+ has no interior measure");

        Vec bar_chart(r);
        for (std::size_t i = 0; i < r; ++i)
            bar_chart[i] = integrate_interior(Polynomial::variable(r, i) * pi_) / report.V_P;
        report.bar = cp_.chart.to_ambient(bar_chart);
        report.bar_proj = cp_.iota_project(report.bar);

        Rational denom(0);
        Vec tilde_num = zero_vec(cp_.x_basis.size());
        for (const auto& patch : boundary_) {
            const Rational lam_big = cp_.meta[patch.facet].big_lambda;
            Rational i_pi(0);
            for (const auto& cell : patch.cones) i_pi += integrate_poly_simplex(pi_, cell);
            denom += lam_big * Rational(m + r) * i_pi;
            for (std::size_t j = 0; j < cp_.x_basis.size(); ++j) {
                Rational i_vj(0);
                for (const auto& cell : patch.cones)
                    i_vj += integrate_poly_simplex(v_forms_[j] * pi_, cell);
                tilde_num[j] += lam_big * Rational(m + 1 + r) * i_vj;
            }
        }
        report.barS = denom / report.V_P;
        if (denom != 0) {
            report.tilde_bar = scale(Rational(1) / denom, tilde_num);
            report.tilde_bar_ambient = cp_.v_to_ambient(report.tilde_bar);
        } else {
            report.tilde_bar = zero_vec(cp_.x_basis.size());
            report.tilde_bar_ambient = zero_vec(datum.rank);
        }
        return report;
    }

    /// Weighted moments with weight exp(X . y); X in a. Fixed-order
    /// simplex rule (exact at X = 0 for the polynomial integrands) with
    /// dyadic subdivision. Throws when the tolerance is unreachable at the
    /// given depth.
    struct Weighted {
        double mass = 0.0;
        std::vector<double> bar;      // ambient
        std::vector<double> bar_proj; // v-coordinates
        double rel_error = 0.0;
        bool converged = true;
    };

    Weighted exp_weighted_moments(const Vec& x_dir, double rel_tol, unsigned max_depth,
                                  bool throw_on_failure = true) const {
        const std::size_t r = cp_.dim();
        const auto weight = exp_weight_function(x_dir);
        const auto metric = exp_edge_metric(x_dir);
        const unsigned rule = rule_index();

        const auto mass = integrate_adaptive(
            interior_.simplices, [&](const std::vector<double>& t) { return weight(t) * pi_.eval_double(t); },
            rule, rel_tol, max_depth, metric);
        std::vector<QuadratureResult> first(r);
        for (std::size_t i = 0; i < r; ++i) {
            const Polynomial mono = Polynomial::variable(r, i) * pi_;
            first[i] = integrate_adaptive(
                interior_.simplices, [&](const std::vector<double>& t) { return weight(t) * mono.eval_double(t); },
                rule, rel_tol, max_depth, metric);
        }
        Weighted w;
        w.mass = mass.value;
        w.converged = mass.converged;
        double err = mass.value != 0.0 ? mass.error_bound / std::fabs(mass.value) : mass.error_bound;
        std::vector<double> bar_chart(r);
        for (std::size_t i = 0; i < r; ++i) {
            w.converged = w.converged && first[i].converged;
            bar_chart[i] = first[i].value / mass.value;
            const double scale_i = std::max(std::fabs(first[i].value), std::fabs(mass.value));
            if (scale_i > 0.0) err = std::max(err, first[i].error_bound / scale_i);
        }
        w.rel_error = err;
        if (!w.converged && throw_on_failure)
            throw Error("exponential-weight quadrature did not reach tolerance at depth " +
                        std::to_string(max_depth) + "; best mass estimate " + std::to_string(w.mass));

        // ambient mean through the affine chart map
        Vec bar_chart_q(r);
        for (std::size_t i = 0; i < r; ++i) bar_chart_q[i] = Rational(bar_chart[i]);
        const Vec ambient = cp_.chart.to_ambient(bar_chart_q);
        for (const auto& q : ambient) w.bar.push_back(to_double(q));
        const Vec proj = cp_.iota_project(ambient);
        for (const auto& q : proj) w.bar_proj.push_back(to_double(q));
        return w;
    }

    /// Gram matrix of integrals int f_i f_j exp(X.y) pi and the vector
    /// int f_i exp(X.y) pi for affine chart forms f_i: the Newton data.
    struct ExpSystem {
        std::vector<double> values;            // psi_i
        std::vector<std::vector<double>> jacobian;
        double mass = 0.0;
        bool converged = true;
    };

    ExpSystem exp_system(const std::vector<Polynomial>& forms, const Vec& x_dir, double rel_tol,
                         unsigned max_depth) const {
        const auto weight = exp_weight_function(x_dir);
        const auto metric = exp_edge_metric(x_dir);
        const unsigned rule = rule_index();
        ExpSystem sys;
        const std::size_t q = forms.size();
        sys.values.resize(q);
        sys.jacobian.assign(q, std::vector<double>(q, 0.0));
        auto run = [&](const std::function<double(const std::vector<double>&)>& f) {
            const auto res = integrate_adaptive(interior_.simplices, f, rule, rel_tol, max_depth, metric);
            sys.converged = sys.converged && res.converged;
            return res.value;
        };
        sys.mass = run([&](const std::vector<double>& t) { return weight(t) * pi_.eval_double(t); });
        for (std::size_t i = 0; i < q; ++i)
            sys.values[i] = run([&](const std::vector<double>& t) {
                return forms[i].eval_double(t) * weight(t) * pi_.eval_double(t);
            });
        for (std::size_t i = 0; i < q; ++i)
            for (std::size_t j = i; j < q; ++j) {
                const double v = run([&](const std::vector<double>& t) {
                    return forms[i].eval_double(t) * forms[j].eval_double(t) * weight(t) * pi_.eval_double(t);
                });
                sys.jacobian[i][j] = sys.jacobian[j][i] = v;
            }
        return sys;
    }

    /// Quasi-random oracle over calP_+ for an arbitrary chart integrand.
    McEstimate oracle(const std::function<double(const std::vector<double>&)>& integrand,
                      unsigned long long samples) const {
        return mc_integrate(interior_.simplices, integrand, samples);
    }

    /// Edge metric that adds the exponent range of exp(X . y) along an
    /// edge, so adaptive splits resolve a peaked weight.
    EdgeMetric exp_edge_metric(const Vec& x_dir) const {
        const auto form = ambient_pairing_form(x_dir);
        std::vector<double> coeff(cp_.dim(), 0.0);
        for (const auto& [e, c] : form.terms())
            for (std::size_t i = 0; i < cp_.dim(); ++i)
                if (e[i]) coeff[i] = to_double(c);
        return [coeff](const std::vector<double>& a, const std::vector<double>& b) {
            double span = 0.0;
            for (std::size_t i = 0; i < coeff.size(); ++i) span += coeff[i] * (a[i] - b[i]);
            return std::fabs(span) + detail_quad_euclid(a, b);
        };
    }

    std::function<double(const std::vector<double>&)> exp_weight_function(const Vec& x_dir) const {
        const auto form = ambient_pairing_form(x_dir);
        std::vector<double> coeff;
        double c0 = 0.0;
        const std::size_t r = cp_.dim();
        coeff.resize(r, 0.0);
        for (const auto& [e, c] : form.terms()) {
            unsigned deg = 0;
            std::size_t var = 0;
            for (std::size_t i = 0; i < r; ++i) {
                deg += e[i];
                if (e[i]) var = i;
            }
            if (deg == 0) c0 = to_double(c);
            else coeff[var] = to_double(c);
        }
        return [coeff, c0](const std::vector<double>& t) {
            double s = c0;
            for (std::size_t i = 0; i < coeff.size(); ++i) s += coeff[i] * t[i];
            return std::exp(s);
        };
    }

    unsigned rule_index() const {
        // the pair (index, index-1) is exact for polynomial degree
        // 2|R+|+5 resp. 2|R+|+3, so every X = 0 integrand (degree at most
        // 2|R+|+2) integrates exactly with a zero error estimate
        return static_cast<unsigned>(cp_.cone.datum.num_positive_roots()) + 2;
    }

    const Polynomial& v_form(std::size_t j) const { return v_forms_[j]; }
    const Polynomial& y_form(std::size_t i) const { return y_forms_[i]; }

private:
    CharPolytope cp_;
    Triangulation interior_;
    std::vector<detail::FacetPatch> boundary_;
    Polynomial pi_{0};
    std::vector<Polynomial> y_forms_; // ambient coordinate functions of t
    std::vector<Polynomial> v_forms_; // projected coordinate functions of t
    Vec apex_;
};

/// Exact moments of the projected polytope P_+ (or P'_+) computed entirely
/// on the v-coordinate side; the independent second route for the
/// criterion cross-check and the k-energy integrals.
class VSideEngine {
public:
    explicit VSideEngine(const CharPolytope& cp) : cp_(cp) {
        const std::size_t r = cp_.x_basis.size();
        interior_ = triangulate(cp_.proj_plus, cp_.proj_plus_verts);
        if (interior_.degenerate) throw Error("projected positive polytope is lower-dimensional");
        pi_ = Polynomial::constant(r, Rational(1));
        for (const auto& alpha : cp_.cone.datum.positive_roots) {
            const auto form = Polynomial::affine(cp_.form_to_v(alpha), Rational(0));
            pi_ = pi_ * form * form;
        }
        boundary_ = detail::build_facet_patches(cp_.proj_plus, zero_vec(r), cp_.meta);
    }

    const CharPolytope& polytope() const { return cp_; }
    const Triangulation& interior() const { return interior_; }
    const std::vector<detail::FacetPatch>& boundary() const { return boundary_; }
    const Polynomial& pi() const { return pi_; }

    Rational integrate_interior(const Polynomial& p) const {
        return integrate_poly_simplices(p, interior_.simplices);
    }

    Rational volume_weight() const { return integrate_interior(pi_); }

    /// bar(P_+) in v-coordinates, exactly.
    Vec bar() const {
        const std::size_t r = cp_.x_basis.size();
        const Rational v_p = volume_weight();
        Vec b(r);
        for (std::size_t j = 0; j < r; ++j)
            b[j] = integrate_interior(Polynomial::variable(r, j) * pi_) / v_p;
        return b;
    }

    /// Facet integral  sum_A Lambda_A int_{F_A cap P_+} q(v) <v,nu_A> dsigma0
    /// for a polynomial q, via the cone identity (q pi homogeneous of known
    /// degree about the origin piecewise by monomial).
    Rational boundary_weighted_integral(const Polynomial& q) const {
        const std::size_t r = cp_.x_basis.size();
        Rational total(0);
        for (const auto& patch : boundary_) {
            const Rational lam_big = cp_.meta[patch.facet].big_lambda;
            const Polynomial integrand = q * pi_;
            // split by homogeneous degree: each monomial of degree m gets (m+r)
            for (const auto& [e, c] : integrand.terms()) {
                unsigned deg = 0;
                for (auto x : e) deg += x;
                Polynomial mono(r);
                {
                    Polynomial unit = Polynomial::constant(r, c);
                    for (std::size_t i = 0; i < r; ++i)
                        for (unsigned k = 0; k < e[i]; ++k) unit = unit * Polynomial::variable(r, i);
                    mono = unit;
                }
                Rational i_m(0);
                for (const auto& cell : patch.cones) i_m += integrate_poly_simplex(mono, cell);
                total += lam_big * Rational(deg + static_cast<unsigned>(r)) * i_m;
            }
        }
        return total;
    }

private:
    CharPolytope cp_;
    Triangulation interior_;
    std::vector<detail::FacetPatch> boundary_;
    Polynomial pi_{0};
};

} // namespace sasaki
