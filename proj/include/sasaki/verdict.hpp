#pragma once

#include "sasaki/measure.hpp"

#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace sasaki {

/// Existence verdict: the criterion vector decomposed over the simple
/// roots. Exact fields are filled on the polynomial path (X = 0); the
/// numeric fields always carry the double view.
struct Verdict {
    std::string kind; // "SE" | "soliton" | "csc-properness"
    Vec b;            // criterion vector in a^* (exact path)
    std::vector<double> b_d;
    Vec coeffs;
    std::vector<double> coeffs_d;
    Rational off_span_residual2{0};
    double off_span_residual2_d = 0.0;
    bool holds = false;
    std::string confidence = "exact"; // exact | numeric | indeterminate
    Rational margin{0};
    double margin_d = 0.0;
    double error_bound = 0.0;
    std::vector<std::string> diagnostics;
};

namespace detail {

inline std::vector<double> vec_to_double(const Vec& v) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = to_double(v[i]);
    return out;
}

/// Exact decomposition wrapped into a Verdict.
inline Verdict exact_membership_verdict(const std::string& kind, const Vec& b, const GroupDatum& datum) {
    Verdict v;
    v.kind = kind;
    v.b = b;
    v.b_d = vec_to_double(b);
    const auto mem = xi_membership(b, datum);
    v.coeffs = mem.coeffs;
    v.coeffs_d = vec_to_double(mem.coeffs);
    v.off_span_residual2 = mem.residual_norm2;
    v.off_span_residual2_d = to_double(mem.residual_norm2);
    v.holds = mem.in_relative_interior;
    v.margin = mem.margin;
    v.margin_d = to_double(mem.margin);
    if (datum.simple_roots.empty())
        v.diagnostics.push_back("toric input: Xi = {0}, criterion reduces to the Futaki residuals");
    return v;
}

/// Double-precision decomposition over the simple roots with an error band:
/// inside the band the verdict is reported indeterminate.
inline Verdict numeric_membership_verdict(const std::string& kind, const std::vector<double>& b,
                                          const GroupDatum& datum, double error_bound) {
    Verdict v;
    v.kind = kind;
    v.b_d = b;
    v.error_bound = error_bound;
    v.confidence = "numeric";
    const auto& simple = datum.simple_roots;
    const std::size_t k = simple.size();
    std::vector<double> coeffs(k, 0.0);
    if (k > 0) {
        Mat a = zero_mat(k, k);
        Vec rhs = zero_vec(k);
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < k; ++j) a[i][j] = datum.pair_dual(simple[i], simple[j]);
            Vec bq(b.size());
            for (std::size_t t = 0; t < b.size(); ++t) bq[t] = Rational(b[t]);
            rhs[i] = datum.pair_dual(simple[i], bq);
        }
        const auto sol = solve(a, rhs);
        if (!sol) throw Error("singular simple-root Gram matrix");
        for (std::size_t i = 0; i < k; ++i) coeffs[i] = to_double((*sol)[i]);
    }
    v.coeffs_d = coeffs;
    std::vector<double> residual = b;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t t = 0; t < b.size(); ++t) residual[t] -= coeffs[i] * to_double(simple[i][t]);
    double res2 = 0.0;
    {
        Vec rq(residual.size());
        for (std::size_t t = 0; t < residual.size(); ++t) rq[t] = Rational(residual[t]);
        res2 = to_double(datum.pair_dual(rq, rq));
    }
    v.off_span_residual2_d = res2;
    double margin = k ? coeffs[0] : 0.0;
    for (const auto& c : coeffs) margin = std::min(margin, c);
    v.margin_d = margin;
    const bool residual_small = std::sqrt(std::max(res2, 0.0)) <= error_bound;
    if (k == 0) {
        v.holds = residual_small;
        if (!residual_small) v.confidence = "numeric";
    } else if (margin > error_bound && residual_small) {
        v.holds = true;
    } else if (margin < -error_bound || !residual_small) {
        v.holds = false;
    } else {
        v.holds = false;
        v.confidence = "indeterminate";
    }
    return v;
}

inline bool cholesky_pd(std::vector<std::vector<double>> m) {
    const std::size_t n = m.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = m[i][j];
            for (std::size_t k = 0; k < j; ++k) s -= m[i][k] * m[j][k];
            if (i == j) {
                if (s <= 0.0) return false;
                m[i][i] = std::sqrt(s);
            } else {
                m[i][j] = s / m[j][j];
            }
        }
    }
    return true;
}

inline std::vector<double> solve_spd(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = a.size();
    // Cholesky a = L L^T
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a[i][j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i][k] * a[j][k];
            if (i == j) a[i][i] = std::sqrt(s);
            else a[i][j] = s / a[j][j];
        }
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= a[i][k] * b[k];
        b[i] = s / a[i][i];
    }
    for (std::size_t ii = n; ii > 0; --ii) {
        const std::size_t i = ii - 1;
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= a[k][i] * b[k];
        b[i] = s / a[i][i];
    }
    return b;
}

} // namespace detail

struct FutakiReport {
    std::vector<Vec> directions;     // basis of a_z orthogonal to xi
    std::vector<Rational> residuals; // (bar + gamma_0/(n+1))(Y)
    Rational xi_residual{0};         // identically zero by l_xi = 1
    bool vanishes = true;
};

/// Futaki residuals over a basis of the xi-orthogonal complement of the
/// center; the xi-direction itself must vanish identically.
inline FutakiReport futaki_check(const MomentReport& report, const Vec& gamma0, const GroupDatum& datum,
                                 const Vec& xi) {
    FutakiReport fr;
    const Vec shifted = add(report.bar, scale(Rational(1, datum.n + 1), gamma0));
    fr.xi_residual = dot(shifted, xi);
    if (fr.xi_residual != 0)
        throw Error("internal-consistency failure: xi-direction Futaki residual " + fr.xi_residual.str() +
                    " is nonzero, but l_xi = 1 on calP forces zero");
    // basis of {Y in a_z : <Y, xi>_a = 0}
    const auto& zb = datum.center_basis;
    Mat row(1, zero_vec(zb.size()));
    for (std::size_t j = 0; j < zb.size(); ++j) row[0][j] = dot(mat_vec(datum.gram_inv, zb[j]), xi);
    for (const auto& coeff : nullspace(row)) {
        Vec y = zero_vec(datum.rank);
        for (std::size_t j = 0; j < zb.size(); ++j) y = add(y, scale(coeff[j], zb[j]));
        fr.directions.push_back(y);
        fr.residuals.push_back(dot(shifted, y));
        fr.vanishes = fr.vanishes && fr.residuals.back() == 0;
    }
    return fr;
}

struct SeCriterionResult {
    Verdict verdict;
    Verdict dual_route; // from bar(P'_+) on the projected side
    FutakiReport futaki;
    std::optional<Rational> rescale_factor; // set when gamma_0(xi) != -(n+1)
};

/// Theorem 0.1 criterion: b = bar(calP_+) - 2 sigma/(n+1) + gamma_0/(n+1)
/// in Xi. Recomputed independently on the translated projected polytope
/// (bar(P'_+) in 2 sigma/(n+1) + Xi); disagreement between the two routes
/// is an internal-consistency error, never silently resolved.
inline SeCriterionResult se_criterion(const MomentEngine& engine, const VSideEngine& translated,
                                      const MomentReport& report, const Vec& gamma0) {
    const auto& cp = engine.polytope();
    const auto& datum = cp.cone.datum;
    const Rational n1(datum.n + 1);

    SeCriterionResult result;
    Vec b = report.bar;
    b = sub(b, scale(Rational(2) / n1, datum.sigma));
    b = add(b, scale(Rational(1) / n1, gamma0));
    result.verdict = detail::exact_membership_verdict("SE", b, datum);

    const Vec bar_translated = translated.bar(); // v-coordinates on P'
    Vec b2 = translated.polytope().v_to_ambient(bar_translated);
    b2 = sub(b2, scale(Rational(2) / n1, datum.sigma));
    result.dual_route = detail::exact_membership_verdict("SE (0316+)", b2, datum);

    if (result.verdict.coeffs != result.dual_route.coeffs ||
        result.verdict.holds != result.dual_route.holds)
        throw Error("internal-consistency error: criteria (0316) and (0316+) disagree");

    result.futaki = futaki_check(report, gamma0, datum, cp.xi);
    const Rational g_xi = dot(gamma0, cp.xi);
    if (g_xi != Rational(-(datum.n + 1))) {
        result.rescale_factor = Rational(datum.n + 1) / (-g_xi);
        result.verdict.diagnostics.push_back(
            "gamma_0(xi) = " + g_xi.str() + " != -(n+1); rescale xi by " + result.rescale_factor->str() +
            " for the transverse Fano normalization");
    }
    return result;
}

struct CscReport {
    Verdict tilde_bar_condition;   // (min Lambda * tilde_bar_ss - 4 sigma) in Xi
    Verdict gap_condition;         // (tilde_bar_ss - bar_ss) in closure(Xi)
    Rational scalar_gap{0};        // (n+1) min Lambda - barS
    bool scalar_positive = false;
    Rational min_lambda{0};
    bool automatic_under_fano = false;
};

/// The three properness conditions of the general csc criterion, evaluated
/// exactly from the weighted moments. Under the gamma_0 normalization the
/// last two hold automatically and are flagged as such.
inline CscReport csc_properness(const MomentEngine& engine, const MomentReport& report,
                                const std::optional<Vec>& gamma0 = std::nullopt) {
    const auto& cp = engine.polytope();
    const auto& datum = cp.cone.datum;
    CscReport out;

    std::optional<Rational> min_lambda;
    for (const auto& m : cp.meta) {
        if (!m.outer) continue;
        if (!min_lambda || m.big_lambda < *min_lambda) min_lambda = m.big_lambda;
    }
    if (!min_lambda) throw Error("csc_properness: no outer facets");
    out.min_lambda = *min_lambda;

    // semisimple projections via the simple-root decomposition
    const auto tb = xi_membership(report.tilde_bar_ambient, datum);
    const auto bb = xi_membership(report.bar, datum);
    Vec tb_ss = zero_vec(datum.rank), bb_ss = zero_vec(datum.rank);
    for (std::size_t i = 0; i < datum.simple_roots.size(); ++i) {
        tb_ss = add(tb_ss, scale(tb.coeffs[i], datum.simple_roots[i]));
        bb_ss = add(bb_ss, scale(bb.coeffs[i], datum.simple_roots[i]));
    }

    Vec c1 = sub(scale(*min_lambda, tb_ss), scale(Rational(4), datum.sigma));
    out.tilde_bar_condition = detail::exact_membership_verdict("csc-properness", c1, datum);

    Vec c2 = sub(tb_ss, bb_ss);
    out.gap_condition = detail::exact_membership_verdict("csc-properness", c2, datum);
    { // closure: nonnegative coefficients suffice
        const auto mem = xi_membership(c2, datum);
        bool closure = is_zero(mem.residual);
        for (const auto& c : mem.coeffs) closure = closure && c >= 0;
        out.gap_condition.holds = closure;
    }

    out.scalar_gap = Rational(datum.n + 1) * (*min_lambda) - report.barS;
    out.scalar_positive = out.scalar_gap > 0;

    if (gamma0 && primitive(*gamma0) == primitive(cp.gamma) &&
        dot(*gamma0, cp.xi) == Rational(-(datum.n + 1))) {
        out.automatic_under_fano = true;
        out.gap_condition.diagnostics.push_back("automatic under the gamma_0 normalization");
    }
    return out;
}

struct NewtonStep {
    double residual_norm = 0.0;
    double step_norm = 0.0;
    unsigned halvings = 0;
    bool jacobian_pd = true;
};

struct SolitonResult {
    std::vector<Vec> x_directions;   // basis of a_z cap ker(gamma_0)
    std::vector<double> x_coords;    // X = sum x_coords[i] * x_directions[i]
    std::vector<double> x_ambient;
    std::vector<double> bar_x;        // ambient
    std::vector<double> bar_x_proj;   // v-coordinates
    double quadrature_error = 0.0;
    std::vector<NewtonStep> trace;
    bool converged = true;
    bool exact_path = false;          // no soliton directions: X = 0
    double residual_norm = 0.0;
    std::vector<double> full_condition_residuals; // (bar_X + gamma_0/(n+1))(z_k) over the center basis
    Verdict verdict;
    std::optional<Verdict> exact_verdict; // on the X = 0 path
};

/// Damped Newton solve of int y_i e^{X.y} pi = 0 over the center
/// directions killed by gamma_0, followed by the soliton criterion
/// (0316=). The Jacobian is the weighted second-moment matrix and must be
/// positive-definite at every step.
inline SolitonResult solve_soliton(const MomentEngine& engine, const Vec& gamma0, double tol = 1e-10,
                                   unsigned max_depth = 12) {
    const auto& cp = engine.polytope();
    const auto& datum = cp.cone.datum;
    SolitonResult result;

    { // basis of a_z cap ker(gamma_0)
        Mat row(1, zero_vec(datum.center_basis.size()));
        for (std::size_t j = 0; j < datum.center_basis.size(); ++j)
            row[0][j] = dot(gamma0, datum.center_basis[j]);
        for (const auto& coeff : nullspace(row)) {
            Vec y = zero_vec(datum.rank);
            for (std::size_t j = 0; j < datum.center_basis.size(); ++j)
                y = add(y, scale(coeff[j], datum.center_basis[j]));
            result.x_directions.push_back(y);
        }
    }
    const std::size_t q = result.x_directions.size();
    result.x_coords.assign(q, 0.0);
    result.x_ambient.assign(datum.rank, 0.0);

    const Rational n1(datum.n + 1);

    if (q == 0) {
        // no soliton directions: X = 0 and everything stays exact
        result.exact_path = true;
        const auto report = engine.moments();
        result.bar_x = detail::vec_to_double(report.bar);
        result.bar_x_proj = detail::vec_to_double(report.bar_proj);
        Vec b = report.bar;
        b = sub(b, scale(Rational(2) / n1, datum.sigma));
        b = add(b, scale(Rational(1) / n1, gamma0));
        result.exact_verdict = detail::exact_membership_verdict("soliton", b, datum);
        result.verdict = *result.exact_verdict;
        for (const auto& z : datum.center_basis) {
            const Rational res = dot(add(report.bar, scale(Rational(1) / n1, gamma0)), z);
            result.full_condition_residuals.push_back(to_double(res));
        }
        return result;
    }

    std::vector<Polynomial> forms;
    forms.reserve(q);
    for (const auto& y : result.x_directions) forms.push_back(engine.ambient_pairing_form(y));

    // termination scale: weighted mass times the largest |form| over calP_+
    double form_scale = 0.0;
    for (const auto& vtx : cp.cal_p_plus_verts.vertices)
        for (const auto& f : forms) form_scale = std::max(form_scale, std::fabs(to_double(f.eval(vtx))));
    if (form_scale == 0.0) form_scale = 1.0;

    auto ambient_of = [&](const std::vector<double>& c) {
        std::vector<double> x(datum.rank, 0.0);
        for (std::size_t i = 0; i < q; ++i)
            for (std::size_t t = 0; t < datum.rank; ++t) x[t] += c[i] * to_double(result.x_directions[i][t]);
        return x;
    };
    auto exact_dir = [&](const std::vector<double>& c) {
        Vec x = zero_vec(datum.rank);
        for (std::size_t i = 0; i < q; ++i) x = add(x, scale(Rational(c[i]), result.x_directions[i]));
        return x;
    };

    std::vector<double> coords(q, 0.0);
    auto system_at = [&](const std::vector<double>& c) {
        return engine.exp_system(forms, exact_dir(c), tol, max_depth);
    };
    auto norm_inf = [](const std::vector<double>& v) {
        double n = 0.0;
        for (auto x : v) n = std::max(n, std::fabs(x));
        return n;
    };

    auto sys = system_at(coords);
    bool inside_basin = false;
    for (unsigned iter = 0; iter < 100; ++iter) {
        if (!sys.converged)
            throw Error("soliton solve: quadrature failed to converge");
        const double scale_now = tol * sys.mass * form_scale;
        const double res = norm_inf(sys.values);
        if (res < scale_now) break;
        if (iter + 1 == 100)
            throw Error("soliton Newton did not converge in 100 iterations; last residual " +
                        std::to_string(res));
        NewtonStep step;
        step.residual_norm = res;
        step.jacobian_pd = detail::cholesky_pd(sys.jacobian);
        if (!step.jacobian_pd)
            throw Error("soliton Newton: Jacobian not positive-definite (quadrature failure)");
        std::vector<double> rhs(q);
        for (std::size_t i = 0; i < q; ++i) rhs[i] = -sys.values[i];
        const auto delta = detail::solve_spd(sys.jacobian, rhs);
        double factor = 1.0;
        std::vector<double> trial(q);
        MomentEngine::ExpSystem trial_sys;
        unsigned halvings = 0;
        while (true) {
            for (std::size_t i = 0; i < q; ++i) trial[i] = coords[i] + factor * delta[i];
            trial_sys = system_at(trial);
            if (inside_basin || norm_inf(trial_sys.values) < res || halvings >= 30) break;
            factor *= 0.5;
            ++halvings;
        }
        if (halvings == 0 && norm_inf(trial_sys.values) < 0.25 * res)
            inside_basin = true; // strong contraction: stay undamped from here on
        step.halvings = halvings;
        step.step_norm = factor * norm_inf(delta);
        result.trace.push_back(step);
        coords = trial;
        sys = trial_sys;
    }
    result.x_coords = coords;
    result.x_ambient = ambient_of(coords);
    result.residual_norm = norm_inf(sys.values);

    const auto weighted = engine.exp_weighted_moments(exact_dir(coords), tol, max_depth);
    result.bar_x = weighted.bar;
    result.bar_x_proj = weighted.bar_proj;
    result.quadrature_error = weighted.rel_error;

    std::vector<double> b(datum.rank);
    for (std::size_t t = 0; t < datum.rank; ++t)
        b[t] = weighted.bar[t] - 2.0 * to_double(datum.sigma[t]) / to_double(n1) +
               to_double(gamma0[t]) / to_double(n1);
    const double band = 10.0 * std::max(weighted.rel_error, tol);
    result.verdict = detail::numeric_membership_verdict("soliton", b, datum, band);

    for (const auto& z : datum.center_basis) {
        double r = 0.0;
        for (std::size_t t = 0; t < datum.rank; ++t)
            r += (weighted.bar[t] + to_double(gamma0[t]) / to_double(n1)) * to_double(z[t]);
        result.full_condition_residuals.push_back(r);
    }
    return result;
}

struct SweepRecord {
    Rational parameter{0};
    Vec xi;
    bool in_sigma_o = true;
    bool skipped = false;
    SolitonResult soliton;
    double milliseconds = 0.0;
};

struct SweepResult {
    std::vector<SweepRecord> records;
    std::vector<std::pair<Rational, Rational>> transitions; // refined [lo, hi] brackets
};

/// Per-step soliton solve along a path in Sigma_O, with bisection
/// refinement of every verdict transition down to `resolution` in the path
/// parameter. Steps leaving Sigma_O are recorded as skipped.
inline SweepResult reeb_sweep(const MomentCone& cone, const Vec& gamma0,
                              const std::function<Vec(const Rational&)>& path,
                              const std::vector<Rational>& params, const Rational& resolution,
                              double tol = 1e-10, unsigned max_depth = 12, bool collect_timing = false,
                              std::optional<std::size_t> chart_override = std::nullopt) {
    const auto& datum = cone.datum;
    SweepResult result;

    auto evaluate = [&](const Rational& t) {
        SweepRecord rec;
        rec.parameter = t;
        rec.xi = path(t);
        const bool in_slice = dot(gamma0, rec.xi) == Rational(-(datum.n + 1));
        rec.in_sigma_o = in_slice && xi_in_sigma(cone, rec.xi);
        if (!rec.in_sigma_o) {
            rec.skipped = true;
            return rec;
        }
        const auto start = std::chrono::steady_clock::now();
        const auto cp = characteristic_polytope(cone, rec.xi, gamma0, chart_override);
        const MomentEngine engine(cp);
        rec.soliton = solve_soliton(engine, gamma0, tol, max_depth);
        if (collect_timing) {
            const auto stop = std::chrono::steady_clock::now();
            rec.milliseconds = std::chrono::duration<double, std::milli>(stop - start).count();
        }
        return rec;
    };

    for (const auto& t : params) result.records.push_back(evaluate(t));

    for (std::size_t i = 0; i + 1 < result.records.size(); ++i) {
        const auto& a = result.records[i];
        const auto& b = result.records[i + 1];
        if (a.skipped || b.skipped) continue;
        if (a.soliton.verdict.holds == b.soliton.verdict.holds) continue;
        Rational lo = a.parameter, hi = b.parameter;
        bool lo_holds = a.soliton.verdict.holds;
        while (rational_abs(hi - lo) > resolution) {
            const Rational mid = (lo + hi) / 2;
            const auto rec = evaluate(mid);
            if (rec.skipped) break;
            if (rec.soliton.verdict.holds == lo_holds) lo = mid;
            else hi = mid;
        }
        result.transitions.push_back({lo, hi});
    }
    return result;
}

} // namespace sasaki
