#pragma once

#include "sasaki/measure.hpp"

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace sasaki {

class VSideEngine;
inline unsigned engine_rule_index(const CharPolytope& cp) {
    return static_cast<unsigned>(cp.cone.datum.num_positive_roots()) + 2;
}

/// Smooth convex function on the projected polytope interior, given by
/// closed-form evaluators in v-coordinates: value, gradient (x-basis
/// coordinates of a'), Hessian (bilinear form on v-coordinates).
struct C2Function {
    std::function<double(const std::vector<double>&)> value;
    std::function<std::vector<double>(const std::vector<double>&)> gradient;
    std::function<std::vector<std::vector<double>>(const std::vector<double>&)> hessian;
    std::string boundary_tag = "guillemin"; // "guillemin" | "smooth"
};

/// Guillemin data on P': the canonical potential u_G = (1/2) sum l'_A log l'_A,
/// its corrected form u_0, and exact facet forms.
struct GuilleminData {
    std::vector<Vec> normals_v; // l'_A(v) = normals_v[A] . v + offsets[A]
    Vec offsets;
    Vec linf_normal; // sum of the facet forms
    Rational linf_offset{0};
    Rational linf_min_on_closure{0}; // min over vertices, must be > 0
    C2Function u_g;
    C2Function u_0;
};

namespace detail {

inline std::vector<double> vec_d(const Vec& v) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = to_double(v[i]);
    return out;
}

} // namespace detail

/// Closed-form evaluators for u_G and u_0 = u_G - (1/2) l'_inf log l'_inf
/// + log 2 + 1/2 on the interior of P'. Evaluation on or outside the
/// boundary is an error. u_0 - u_G extends smoothly because l'_inf is
/// checked to have a strictly positive lower bound on the closure.
inline GuilleminData build_guillemin(const CharPolytope& cp) {
    GuilleminData g;
    const std::size_t r = cp.x_basis.size();
    g.normals_v = cp.facet_normals_v;
    g.offsets = cp.facet_offsets;
    g.linf_normal = zero_vec(r);
    for (const auto& n : g.normals_v) g.linf_normal = add(g.linf_normal, n);
    for (const auto& c : g.offsets) g.linf_offset += c;

    bool first = true;
    for (const auto& vtx : cp.proj_verts.vertices) {
        const Rational val = dot(g.linf_normal, vtx) + g.linf_offset;
        if (first || val < g.linf_min_on_closure) g.linf_min_on_closure = val;
        first = false;
    }
    if (!first && g.linf_min_on_closure <= 0)
        throw Error("l'_inf does not have a positive lower bound on P'");

    struct Forms {
        std::vector<std::vector<double>> normals;
        std::vector<double> offsets;
        std::vector<double> linf_n;
        double linf_c;
    };
    auto forms = std::make_shared<Forms>();
    for (const auto& n : g.normals_v) forms->normals.push_back(detail::vec_d(n));
    forms->offsets = detail::vec_d(g.offsets);
    forms->linf_n = detail::vec_d(g.linf_normal);
    forms->linf_c = to_double(g.linf_offset);

    auto facet_values = [forms](const std::vector<double>& v) {
        std::vector<double> vals(forms->normals.size());
        for (std::size_t a = 0; a < forms->normals.size(); ++a) {
            double s = forms->offsets[a];
            for (std::size_t i = 0; i < v.size(); ++i) s += forms->normals[a][i] * v[i];
            if (s <= 0.0) throw Error("Guillemin evaluation on or outside the boundary of P'");
            vals[a] = s;
        }
        return vals;
    };

    g.u_g.value = [forms, facet_values](const std::vector<double>& v) {
        const auto vals = facet_values(v);
        double s = 0.0;
        for (auto x : vals) s += x * std::log(x);
        return 0.5 * s;
    };
    g.u_g.gradient = [forms, facet_values](const std::vector<double>& v) {
        const auto vals = facet_values(v);
        std::vector<double> grad(v.size(), 0.0);
        for (std::size_t a = 0; a < vals.size(); ++a) {
            const double f = 0.5 * (1.0 + std::log(vals[a]));
            for (std::size_t i = 0; i < v.size(); ++i) grad[i] += f * forms->normals[a][i];
        }
        return grad;
    };
    g.u_g.hessian = [forms, facet_values](const std::vector<double>& v) {
        const auto vals = facet_values(v);
        std::vector<std::vector<double>> h(v.size(), std::vector<double>(v.size(), 0.0));
        for (std::size_t a = 0; a < vals.size(); ++a)
            for (std::size_t i = 0; i < v.size(); ++i)
                for (std::size_t j = 0; j < v.size(); ++j)
                    h[i][j] += 0.5 * forms->normals[a][i] * forms->normals[a][j] / vals[a];
        return h;
    };
    g.u_g.boundary_tag = "guillemin";

    g.u_0.value = [forms, ug = g.u_g.value](const std::vector<double>& v) {
        double linf = forms->linf_c;
        for (std::size_t i = 0; i < v.size(); ++i) linf += forms->linf_n[i] * v[i];
        return ug(v) - 0.5 * linf * std::log(linf) + std::log(2.0) + 0.5;
    };
    g.u_0.gradient = [forms, ugg = g.u_g.gradient](const std::vector<double>& v) {
        double linf = forms->linf_c;
        for (std::size_t i = 0; i < v.size(); ++i) linf += forms->linf_n[i] * v[i];
        auto grad = ugg(v);
        const double f = 0.5 * (1.0 + std::log(linf));
        for (std::size_t i = 0; i < v.size(); ++i) grad[i] -= f * forms->linf_n[i];
        return grad;
    };
    g.u_0.hessian = [forms, ugh = g.u_g.hessian](const std::vector<double>& v) {
        double linf = forms->linf_c;
        for (std::size_t i = 0; i < v.size(); ++i) linf += forms->linf_n[i] * v[i];
        auto h = ugh(v);
        for (std::size_t i = 0; i < v.size(); ++i)
            for (std::size_t j = 0; j < v.size(); ++j)
                h[i][j] -= 0.5 * forms->linf_n[i] * forms->linf_n[j] / linf;
        return h;
    };
    g.u_0.boundary_tag = "guillemin";
    return g;
}

/// Convex W-invariant piecewise linear function: the maximum over the Weyl
/// orbit of affine pieces whose gradients lie in the closed positive
/// chamber of a'. On P_+ the dominant pieces themselves realize the max.
struct PLFunctionW {
    std::vector<Vec> gradients; // x-basis coordinates, dominant
    Vec offsets;
};

/// Weight function f_a(v) = f(a . v) for a central direction a of a',
/// with the (W1)-(W3) bounds recorded on the closure of P'.
struct WeightFn {
    Vec direction; // a in x-basis coordinates (central: alpha(a) = 0)
    std::string name;
    std::function<double(double)> profile;
    std::function<double(double)> profile_dd; // second derivative, for C_f
    Rational t_min{0}, t_max{0};              // range of a . v over the closure
    double m_f = 0.0, M_f = 0.0, C_f = 0.0;
};

/// Weight evaluated at a v-coordinate point; the "none" weight is nullopt.
using WeightOpt = std::optional<WeightFn>;

namespace detail {

inline double weight_at(const WeightOpt& w, const std::vector<double>& v) {
    if (!w) return 1.0;
    double t = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) t += to_double(w->direction[i]) * v[i];
    return w->profile(t);
}

/// alpha(b_j) pairing table for the x-basis, and sigma(b_j).
struct XPairings {
    std::vector<Vec> alpha_rows; // positive roots paired with the x-basis
    Vec sigma_row;
};

inline XPairings x_pairings(const CharPolytope& cp) {
    XPairings p;
    const auto& datum = cp.cone.datum;
    for (const auto& alpha : datum.positive_roots) {
        Vec row(cp.x_basis.size());
        for (std::size_t j = 0; j < cp.x_basis.size(); ++j) row[j] = dot(alpha, cp.x_basis[j]);
        p.alpha_rows.push_back(std::move(row));
    }
    p.sigma_row = Vec(cp.x_basis.size());
    for (std::size_t j = 0; j < cp.x_basis.size(); ++j) p.sigma_row[j] = dot(datum.sigma, cp.x_basis[j]);
    return p;
}

/// chi(x) + 4 sigma(x) = -2 sum_alpha log((1 - e^{-2 alpha(x)})/2), which
/// stays bounded away from the walls; computed in this combined stable form.
inline double chi_plus_4sigma(const XPairings& p, const std::vector<double>& x) {
    double s = 0.0;
    for (const auto& row : p.alpha_rows) {
        double ax = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) ax += to_double(row[j]) * x[j];
        if (ax <= 0.0) throw Error("gradient left the positive chamber: alpha(grad u) <= 0");
        s += std::log1p(-std::exp(-2.0 * ax)) - std::log(2.0);
    }
    return -2.0 * s;
}

inline double log_det(const std::vector<std::vector<double>>& m) {
    auto a = m;
    const std::size_t n = a.size();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a[i][j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i][k] * a[j][k];
            if (i == j) {
                if (s <= 0.0) throw Error("Hessian sample is not positive-definite");
                a[i][i] = std::sqrt(s);
                acc += std::log(s);
            } else {
                a[i][j] = s / a[j][j];
            }
        }
    }
    return acc;
}

} // namespace detail

/// Samples of a convex function on a simplicial grid over the interior of
/// P'_+ (the quadrature nodes of the epsilon ladder). Positive-definiteness
/// of the Hessian is verified at every node on construction.
struct SampledConvexFn {
    C2Function fn;
    std::string boundary_tag;
    std::vector<std::vector<double>> nodes;
    std::vector<double> values;
    std::vector<std::vector<double>> gradients;
    bool hessian_pd = true;
};

struct NonlinearParams {
    unsigned eps_first = 4;  // ladder 2^-4 .. 2^-10
    unsigned eps_last = 10;
    double rel_tol = 1e-8;
    unsigned max_depth = 10;
};

struct NonlinearResult {
    double value = 0.0;
    double error_bound = 0.0;
    std::vector<double> ladder; // I(eps) per rung
    std::vector<double> extrapolants;
};

/// The nonlinear part N(u) = (1/V_P) int [ -log det_G(u_ij) + chi(grad u)
/// + 4 sigma(grad u) ] f_a pi dv over P'_+, computed on an epsilon-shrunk
/// ladder of homothetic copies and extrapolated to eps -> 0 assuming an
/// O(eps log eps) boundary contribution (O(eps) for smooth-to-boundary u).
inline NonlinearResult nonlinear_part_N(const VSideEngine& engine, const C2Function& u,
                                        const WeightOpt& weight = std::nullopt,
                                        const NonlinearParams& params = {}) {
    const auto& cp = engine.polytope();
    const std::size_t r = cp.x_basis.size();
    const auto pair = detail::x_pairings(cp);
    const double log_det_gram = std::log(to_double(det(cp.v_gram)));
    const Rational v_p = engine.volume_weight();

    // homothety center: vertex average (interior since P'_+ is full-dim)
    Vec center = zero_vec(r);
    for (const auto& v : engine.polytope().proj_plus_verts.vertices) center = add(center, v);
    center = scale(Rational(1, static_cast<long>(engine.polytope().proj_plus_verts.vertices.size())),
                   center);

    const auto& pi_poly = engine.pi();
    auto integrand = [&](const std::vector<double>& v) {
        const double logdet = detail::log_det(u.hessian(v)) - log_det_gram;
        const double chi4 = detail::chi_plus_4sigma(pair, u.gradient(v));
        return (-logdet + chi4) * detail::weight_at(weight, v) * pi_poly.eval_double(v);
    };

    NonlinearResult out;
    std::vector<double> epses;
    for (unsigned k = params.eps_first; k <= params.eps_last; ++k) {
        const Rational eps = Rational(1, 1L << k);
        std::vector<Simplex> scaled;
        for (const auto& s : engine.interior().simplices) {
            Simplex t = s;
            for (auto& vtx : t.vertices)
                vtx = add(center, scale(Rational(1) - eps, sub(vtx, center)));
            scaled.push_back(std::move(t));
        }
        const auto q = integrate_adaptive(scaled, integrand, engine_rule_index(cp), params.rel_tol,
                                          params.max_depth);
        out.ladder.push_back(q.value);
        epses.push_back(to_double(eps));
    }

    // fit I(eps) = I0 + c eps log eps + d eps on a sliding window
    const bool smooth = u.boundary_tag == "smooth";
    for (std::size_t w = 2; w < out.ladder.size(); ++w) {
        if (smooth) {
            const double e1 = epses[w - 1], e2 = epses[w];
            const double i1 = out.ladder[w - 1], i2 = out.ladder[w];
            out.extrapolants.push_back((i2 * e1 - i1 * e2) / (e1 - e2));
        } else {
            const std::size_t i0 = w - 2;
            Mat a = zero_mat(3, 3);
            Vec b = zero_vec(3);
            for (std::size_t j = 0; j < 3; ++j) {
                const double e = epses[i0 + j];
                a[j][0] = 1;
                a[j][1] = Rational(e * std::log(e));
                a[j][2] = Rational(e);
                b[j] = Rational(out.ladder[i0 + j]);
            }
            const auto sol = solve(a, b);
            if (!sol) throw Error("epsilon-ladder extrapolation system is singular");
            out.extrapolants.push_back(to_double((*sol)[0]));
        }
    }
    if (out.extrapolants.size() < 2) throw Error("epsilon ladder too short");
    const double last = out.extrapolants.back();
    const double prev = out.extrapolants[out.extrapolants.size() - 2];
    out.error_bound = std::fabs(last - prev);
    const double scale_ref = std::max(std::fabs(last), 1.0);
    if (out.error_bound > 0.05 * scale_ref)
        throw Error("epsilon-ladder extrapolation is not Cauchy; boundary behavior unexpected");
    out.value = last / to_double(v_p);
    out.error_bound /= to_double(v_p);
    return out;
}

/// Materializes the spec's sampled view of a convex function: nodes of the
/// ladder quadrature with values and gradients, Hessian checked PD at each.
inline SampledConvexFn make_sampled(const VSideEngine& engine, const C2Function& u,
                                    const NonlinearParams& params = {}) {
    SampledConvexFn s;
    s.fn = u;
    s.boundary_tag = u.boundary_tag;
    const std::size_t r = engine.polytope().x_basis.size();
    Vec center = zero_vec(r);
    for (const auto& v : engine.polytope().proj_plus_verts.vertices) center = add(center, v);
    center = scale(Rational(1, static_cast<long>(engine.polytope().proj_plus_verts.vertices.size())),
                   center);
    const SimplexRule rule = grundmann_moller_rule(r, engine_rule_index(engine.polytope()));
    for (unsigned k = params.eps_first; k <= params.eps_last; ++k) {
        const Rational eps = Rational(1, 1L << k);
        for (const auto& simp : engine.interior().simplices) {
            Simplex t = simp;
            for (auto& vtx : t.vertices) vtx = add(center, scale(Rational(1) - eps, sub(vtx, center)));
            const auto sd = to_double_simplex(t);
            for (const auto& bary : rule.barycentric) {
                std::vector<double> node(r, 0.0);
                for (std::size_t i = 0; i < r; ++i)
                    for (std::size_t j = 0; j <= r; ++j) node[i] += bary[j] * sd.vertices[j][i];
                s.nodes.push_back(node);
                s.values.push_back(u.value(node));
                s.gradients.push_back(u.gradient(node));
                try {
                    detail::log_det(u.hessian(node));
                } catch (const Error&) {
                    s.hessian_pd = false;
                }
            }
        }
    }
    if (!s.hessian_pd) throw Error("sampled Hessian not positive-definite at an interior node");
    return s;
}

inline NonlinearResult nonlinear_part_N(const VSideEngine& engine, const SampledConvexFn& u,
                                        const WeightOpt& weight = std::nullopt,
                                        const NonlinearParams& params = {}) {
    return nonlinear_part_N(engine, u.fn, weight, params);
}

/// One linearity region of a piecewise linear function on P'_+.
struct PLRegion {
    std::size_t piece = 0;
    HPolytope hull;
    VPolytope verts;
    Triangulation tri;
};

/// Decomposes P'_+ along the tie hyperplanes of the dominant pieces.
inline std::vector<PLRegion> pl_regions(const VSideEngine& engine, const PLFunctionW& f) {
    const auto& cp = engine.polytope();
    std::vector<PLRegion> regions;
    for (std::size_t n = 0; n < f.gradients.size(); ++n) {
        PLRegion reg;
        reg.piece = n;
        reg.hull = cp.proj_plus;
        for (std::size_t m = 0; m < f.gradients.size(); ++m) {
            if (m == n) continue;
            reg.hull.inequalities.push_back(LinearInequality{
                sub(f.gradients[n], f.gradients[m]), f.offsets[n] - f.offsets[m], -1});
        }
        reg.verts = vertex_enumeration(reg.hull);
        if (reg.verts.vertices.size() <= cp.x_basis.size()) continue;
        reg.tri = triangulate(reg.hull, reg.verts);
        if (reg.tri.degenerate) continue;
        regions.push_back(std::move(reg));
    }
    if (regions.empty()) throw Error("piecewise linear pieces do not cover P'_+");
    return regions;
}

struct LinearPartResult {
    Rational value{0};              // exact (weight none)
    Rational value_volume_route{0}; // Fano volume form, exact
    bool dual_route_checked = false;
    double value_d = 0.0; // weighted path
    std::string weight = "none";
};

/// Exact linear part L(u) for piecewise linear u: the boundary form
/// (1/V)[ sum_A Lambda_A int u <v,nu> pi dsigma - barS int u pi
///        - 4 int sigma(grad u) pi ],
/// evaluated by exact region decomposition. When all Lambda_A agree the
/// Fano volume form (Lambda/V) int < v - (4/Lambda) sigma, grad u> pi dv is
/// computed as an independent exact route and both must coincide.
inline LinearPartResult linear_part_L(const VSideEngine& engine, const PLFunctionW& f) {
    const auto& cp = engine.polytope();
    const std::size_t r = cp.x_basis.size();
    const auto pair = detail::x_pairings(cp);
    const auto regions = pl_regions(engine, f);
    const Rational v_p = engine.volume_weight();
    const Rational bar_s = engine.boundary_weighted_integral(Polynomial::constant(r, Rational(1))) / v_p;

    Rational interior_term(0), sigma_term(0), boundary_term(0);
    for (const auto& reg : regions) {
        const Polynomial u_poly = Polynomial::affine(f.gradients[reg.piece], f.offsets[reg.piece]);
        const Polynomial u_pi = u_poly * engine.pi();
        Rational i_upi(0), i_pi(0);
        for (const auto& cell : reg.tri.simplices) {
            i_upi += integrate_poly_simplex(u_pi, cell);
            i_pi += integrate_poly_simplex(engine.pi(), cell);
        }
        interior_term += i_upi;
        sigma_term += dot(pair.sigma_row, f.gradients[reg.piece]) * i_pi;

        // boundary pieces of this region on each outer facet
        for (const auto& ineq : cp.proj_plus.inequalities) {
            if (ineq.tag < 0) continue;
            const std::size_t a = static_cast<std::size_t>(ineq.tag);
            if (!cp.meta[a].outer) continue;
            HPolytope sub_h = reg.hull;
            sub_h.equalities.push_back(ineq);
            const auto verts = vertex_enumeration(sub_h);
            if (verts.vertices.size() < r) continue;
            const auto tri = triangulate(sub_h, verts);
            if (tri.dim + 1 != r && r > 0) continue;
            if (cp.meta[a].lambda <= 0)
                throw Error("linear_part_L requires the origin inside P'");
            // cone the facet piece to the origin and use homogeneity
            for (const auto& s : tri.simplices) {
                Simplex cone_cell = s;
                cone_cell.vertices.push_back(zero_vec(r));
                for (const auto& [e, c] : u_pi.terms()) {
                    unsigned deg = 0;
                    Polynomial mono = Polynomial::constant(r, c);
                    for (std::size_t i = 0; i < r; ++i)
                        for (unsigned k = 0; k < e[i]; ++k) {
                            mono = mono * Polynomial::variable(r, i);
                            ++deg;
                        }
                    boundary_term += cp.meta[a].big_lambda * Rational(deg + static_cast<unsigned>(r)) *
                                     integrate_poly_simplex(mono, cone_cell);
                }
            }
        }
    }

    LinearPartResult out;
    out.value = (boundary_term - bar_s * interior_term - 4 * sigma_term) / v_p;

    // independent volume route when the facet constants agree
    bool uniform = true;
    std::optional<Rational> lam;
    for (const auto& m : cp.meta) {
        if (!m.outer) continue;
        if (!lam) lam = m.big_lambda;
        else if (*lam != m.big_lambda) uniform = false;
    }
    if (uniform && lam) {
        Rational vol_route(0);
        for (const auto& reg : regions) {
            const auto& a_n = f.gradients[reg.piece];
            Polynomial pairing = Polynomial::constant(r, -Rational(4) / *lam * dot(pair.sigma_row, a_n));
            for (std::size_t j = 0; j < r; ++j)
                pairing += Polynomial::variable(r, j) * Polynomial::constant(r, a_n[j]);
            const Polynomial integrand = pairing * engine.pi();
            for (const auto& cell : reg.tri.simplices) vol_route += integrate_poly_simplex(integrand, cell);
        }
        out.value_volume_route = *lam * vol_route / v_p;
        out.dual_route_checked = true;
        if (out.value != out.value_volume_route)
            throw Error("linear part: boundary and volume routes disagree (" + out.value.str() + " vs " +
                        out.value_volume_route.str() + ")");
    }
    return out;
}

/// Weighted linear part for smooth u by quadrature of the volume form.
inline LinearPartResult linear_part_L(const VSideEngine& engine, const C2Function& u,
                                      const WeightOpt& weight, double rel_tol = 1e-9,
                                      unsigned max_depth = 10) {
    const auto& cp = engine.polytope();
    const std::size_t r = cp.x_basis.size();
    const auto pair = detail::x_pairings(cp);
    std::optional<Rational> lam;
    for (const auto& m : cp.meta) {
        if (!m.outer) continue;
        if (!lam) lam = m.big_lambda;
        else if (*lam != m.big_lambda)
            throw Error("weighted linear part needs uniform Lambda_A (use the Fano-translated P')");
    }
    if (!lam) throw Error("no outer facets");
    const double lam_d = to_double(*lam);
    const Rational v_p = engine.volume_weight();
    const auto& pi_poly = engine.pi();
    std::vector<double> sigma_row_d = detail::vec_d(pair.sigma_row);

    auto integrand = [&](const std::vector<double>& v) {
        const auto grad = u.gradient(v);
        double s = 0.0;
        for (std::size_t j = 0; j < r; ++j) s += v[j] * grad[j];
        double sg = 0.0;
        for (std::size_t j = 0; j < r; ++j) sg += sigma_row_d[j] * grad[j];
        return (s - 4.0 / lam_d * sg) * detail::weight_at(weight, v) * pi_poly.eval_double(v);
    };
    const auto q = integrate_adaptive(engine.interior().simplices, integrand, engine_rule_index(cp),
                                      rel_tol, max_depth);
    LinearPartResult out;
    out.value_d = lam_d * q.value / to_double(v_p);
    out.weight = weight ? weight->name : "none";
    return out;
}

struct MuResult {
    double linear = 0.0;
    double nonlinear = 0.0;
    double value = 0.0;
    double error_bound = 0.0;
};

/// Reduced K-energy mu = L + N on the Fano-translated polytope; both parts
/// are reported.
inline MuResult mu(const VSideEngine& engine, const C2Function& u, const WeightOpt& weight = std::nullopt,
                   const NonlinearParams& params = {}) {
    MuResult out;
    const auto lin = linear_part_L(engine, u, weight);
    const auto non = nonlinear_part_N(engine, u, weight, params);
    out.linear = lin.value_d;
    out.nonlinear = non.value;
    out.value = out.linear + out.nonlinear;
    out.error_bound = non.error_bound;
    return out;
}

struct NecessaryFunction {
    bool criterion_holds = false; // all coefficients positive: nothing to construct
    std::size_t root_index = 0;
    PLFunctionW f;
    Rational lambda{0};     // the selected barycenter coefficient
    int predicted_sign = 0; // sign of L(f) predicted by the identity
};

/// The W-invariant test function max_w <w omega_i, v> attached to the most
/// negative simple-root coefficient of bar(P'_+) - 2 sigma/(n+1).
inline NecessaryFunction necessary_test_function(const CharPolytope& cp, const Vec& coeffs) {
    const auto& datum = cp.cone.datum;
    if (datum.simple_roots.empty()) throw Error("necessary_test_function: no roots (toric input)");
    NecessaryFunction out;
    std::size_t worst = 0;
    for (std::size_t i = 1; i < coeffs.size(); ++i)
        if (coeffs[i] < coeffs[worst]) worst = i;
    out.lambda = coeffs[worst];
    if (out.lambda > 0) {
        out.criterion_holds = true;
        return out;
    }
    out.root_index = worst;
    const Vec weight_sharp = datum.sharp(datum.fundamental_weights[worst]);
    Mat basis_cols = zero_mat(datum.rank, cp.x_basis.size());
    for (std::size_t i = 0; i < datum.rank; ++i)
        for (std::size_t j = 0; j < cp.x_basis.size(); ++j) basis_cols[i][j] = cp.x_basis[j][i];
    const auto coords = solve(basis_cols, weight_sharp);
    if (!coords) throw Error("fundamental weight leaves ker(gamma)");
    out.f.gradients.push_back(*coords);
    out.f.offsets.push_back(Rational(0));
    out.predicted_sign = out.lambda < 0 ? (out.lambda == 0 ? 0 : -1) : 1;
    return out;
}

/// The omega_1 identity of the necessary part: computed L(f) against the
/// printed value n(n+1)|alpha|^2 lambda_1; the single normalization
/// constant kappa = computed/printed is reported and must be reproducible
/// across inputs of equal dimension.
struct PlIdentity {
    Rational lambda1{0};
    Rational alpha_norm2{0};
    Rational printed{0};  // n(n+1)|alpha_(i)|^2 lambda_i
    Rational computed{0}; // exact L(f)
    Rational calibration{0};
};

inline PlIdentity pl_identity(const VSideEngine& engine, std::size_t root_index, const Vec& coeffs) {
    const auto& cp = engine.polytope();
    const auto& datum = cp.cone.datum;
    PlIdentity out;
    out.lambda1 = coeffs[root_index];
    out.alpha_norm2 = datum.pair_dual(datum.simple_roots[root_index], datum.simple_roots[root_index]);
    out.printed = Rational(datum.n) * Rational(datum.n + 1) * out.alpha_norm2 * out.lambda1;

    PLFunctionW f;
    const Vec weight_sharp = datum.sharp(datum.fundamental_weights[root_index]);
    Mat basis_cols = zero_mat(datum.rank, cp.x_basis.size());
    for (std::size_t i = 0; i < datum.rank; ++i)
        for (std::size_t j = 0; j < cp.x_basis.size(); ++j) basis_cols[i][j] = cp.x_basis[j][i];
    const auto coords = solve(basis_cols, weight_sharp);
    if (!coords) throw Error("fundamental weight leaves ker(gamma)");
    f.gradients.push_back(*coords);
    f.offsets.push_back(Rational(0));
    out.computed = linear_part_L(engine, f).value;
    if (out.printed != 0) out.calibration = out.computed / out.printed;
    return out;
}

struct ScanResult {
    std::size_t count = 0;
    Rational min_value{0};
    std::optional<PLFunctionW> witness; // a violation would falsify the implementation
};

/// Random W-invariant convex piecewise linear functions (gradients in the
/// closed positive chamber of a', random offsets); on inputs passing the
/// criterion every L(f) must be nonnegative, exactly.
inline ScanResult positivity_scan(const VSideEngine& engine, std::size_t count, unsigned long seed) {
    const auto& cp = engine.polytope();
    const auto& datum = cp.cone.datum;
    const std::size_t r = cp.x_basis.size();
    const auto pair = detail::x_pairings(cp);

    // chamber generators on the x side: alpha_j(g_i) = delta_ij, plus the
    // central directions of a' (both signs free there)
    Mat rows;
    for (const auto& row : pair.alpha_rows) rows.push_back(row);
    std::vector<Vec> chamber;
    if (!rows.empty()) {
        Mat simple_rows;
        for (const auto& alpha : datum.simple_roots) {
            Vec row(r);
            for (std::size_t j = 0; j < r; ++j) row[j] = dot(alpha, cp.x_basis[j]);
            simple_rows.push_back(std::move(row));
        }
        for (std::size_t i = 0; i < simple_rows.size(); ++i) {
            Vec rhs = zero_vec(simple_rows.size());
            rhs[i] = 1;
            const auto g = solve(simple_rows, rhs);
            if (g) chamber.push_back(*g);
        }
        for (const auto& z : nullspace(simple_rows)) chamber.push_back(z);
    } else {
        for (std::size_t i = 0; i < r; ++i) {
            Vec e = zero_vec(r);
            e[i] = 1;
            chamber.push_back(e);
        }
    }

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> coeff_num(0, 8);
    std::uniform_int_distribution<int> center_num(-4, 4);
    std::uniform_int_distribution<int> offset_num(-3, 3);
    std::uniform_int_distribution<int> npieces(1, 3);

    ScanResult out;
    bool first = true;
    for (std::size_t trial = 0; trial < count; ++trial) {
        PLFunctionW f;
        const int pieces = npieces(rng);
        for (int p = 0; p < pieces; ++p) {
            Vec a = zero_vec(r);
            for (std::size_t i = 0; i < chamber.size(); ++i) {
                const bool central = i >= datum.simple_roots.size() || datum.simple_roots.empty();
                const int c = central ? center_num(rng) : coeff_num(rng);
                a = add(a, scale(Rational(c, 4), chamber[i]));
            }
            f.gradients.push_back(a);
            f.offsets.push_back(Rational(offset_num(rng), 8));
        }
        const auto lin = linear_part_L(engine, f);
        if (first || lin.value < out.min_value) out.min_value = lin.value;
        first = false;
        ++out.count;
        if (lin.value < 0 && !out.witness) out.witness = f;
    }
    return out;
}

/// Weight construction with the (W1)-(W3) bounds measured on the closure.
inline WeightFn make_weight(const VSideEngine& engine, const Vec& direction_x, const std::string& name) {
    const auto& cp = engine.polytope();
    WeightFn w;
    w.direction = direction_x;
    w.name = name;
    { // central check: alpha(a) = 0
        const auto pair = detail::x_pairings(cp);
        for (const auto& row : pair.alpha_rows)
            if (dot(row, direction_x) != 0) throw Error("weight direction must be central in a'");
    }
    bool first = true;
    for (const auto& vtx : cp.proj_plus_verts.vertices) {
        const Rational t = dot(direction_x, vtx);
        if (first || t < w.t_min) w.t_min = t;
        if (first || t > w.t_max) w.t_max = t;
        first = false;
    }
    if (name == "exp") {
        w.profile = [](double t) { return std::exp(t); };
        w.profile_dd = [](double t) { return std::exp(t); };
    } else if (name == "one") {
        w.profile = [](double) { return 1.0; };
        w.profile_dd = [](double) { return 0.0; };
    } else {
        throw Error("unknown weight profile: " + name);
    }
    const double a1 = to_double(w.t_min), a2 = to_double(w.t_max);
    w.m_f = std::min(w.profile(a1), w.profile(a2));
    w.M_f = std::max(w.profile(a1), w.profile(a2));
    double c2 = 0.0;
    for (int i = 0; i <= 32; ++i) {
        const double t = a1 + (a2 - a1) * i / 32.0;
        c2 = std::max({c2, std::fabs(w.profile(t)), std::fabs(w.profile_dd(t))});
    }
    w.C_f = c2;
    if (w.m_f <= 0.0) throw Error("weight profile violates (W2): positive lower bound required");
    return w;
}

/// The weighted barycenter condition bar_a(P_+) in 4 Lambda_L sigma + Xi of
/// the general properness principle, by quadrature.
inline Verdict weighted_bar_criterion(const VSideEngine& engine, const WeightFn& weight,
                                      const Rational& lambda_l, double rel_tol = 1e-9,
                                      unsigned max_depth = 10) {
    const auto& cp = engine.polytope();
    const auto& datum = cp.cone.datum;
    const std::size_t r = cp.x_basis.size();
    const auto& pi_poly = engine.pi();
    WeightOpt w(weight);
    auto wpi = [&](const std::vector<double>& v) { return detail::weight_at(w, v) * pi_poly.eval_double(v); };
    const auto mass = integrate_adaptive(engine.interior().simplices, wpi, engine_rule_index(cp), rel_tol,
                                         max_depth);
    std::vector<double> bar(r, 0.0);
    double err = mass.error_bound / std::max(std::fabs(mass.value), 1e-300);
    for (std::size_t j = 0; j < r; ++j) {
        const auto mj = integrate_adaptive(
            engine.interior().simplices,
            [&](const std::vector<double>& v) { return v[j] * wpi(v); }, engine_rule_index(cp), rel_tol,
            max_depth);
        bar[j] = mj.value / mass.value;
        err = std::max(err, mj.error_bound / std::max(std::fabs(mj.value), std::fabs(mass.value)));
    }
    // ambient lift, subtract 4 Lambda_L sigma
    Vec bar_q(r);
    for (std::size_t j = 0; j < r; ++j) bar_q[j] = Rational(bar[j]);
    const Vec ambient = cp.v_to_ambient(bar_q);
    std::vector<double> b(datum.rank);
    for (std::size_t t = 0; t < datum.rank; ++t)
        b[t] = to_double(ambient[t]) - 4.0 * to_double(lambda_l) * to_double(datum.sigma[t]);
    return detail::numeric_membership_verdict("csc-properness", b, datum, 10.0 * std::max(err, rel_tol));
}

} // namespace sasaki
