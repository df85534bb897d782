#pragma once

#include "sasaki/io.hpp"
#include "sasaki/kenergy.hpp"

#include <chrono>
#include <sstream>

namespace sasaki {

struct RunOptions {
    double tol = 1e-10;
    unsigned quad_depth = 12;
    std::optional<std::size_t> chart; // 0-based internally
    std::optional<unsigned long long> mc_check;
    unsigned long seed = 12345;
    bool timings = false;
    bool auto_rescale = true;
    std::size_t scan_count = 25;
};

struct BaseContext {
    GroupDatum datum;
    MomentCone cone;
};

inline BaseContext build_base(const InputSpec& spec) {
    BaseContext ctx;
    ctx.datum = build_group_datum(spec.group);
    ctx.cone = make_moment_cone(ctx.datum, spec.cone_normals);
    return ctx;
}

inline Json provenance(const LoadedInput& input, const RunOptions& opt) {
    Json j;
    j["input"] = input.path;
    j["input_fnv1a"] = input.content_hash;
    j["tol"] = opt.tol;
    j["quad_depth"] = opt.quad_depth;
    if (opt.chart) j["chart_override"] = *opt.chart + 1;
    j["seed"] = opt.seed;
    j["threads"] = worker_threads();
    return j;
}

/// Everything the criterion pipeline produces, reused by the soliton and
/// k-energy commands.
struct CriterionContext {
    Gamma0 gamma0;
    Vec xi; // after the Fano rescale, when applied
    std::optional<Rational> rescale;
    CharPolytope cp;      // gamma_0 projection at xi
    CharPolytope cp_fano; // translated P'
    MomentReport moments;
};

inline CriterionContext build_criterion_context(const BaseContext& base, Vec xi, const RunOptions& opt) {
    CriterionContext ctx;
    ctx.gamma0 = solve_gamma0(base.cone, xi);
    const Rational g_xi = dot(ctx.gamma0.gamma0, xi);
    if (g_xi == 0) throw Error("gamma_0(xi) = 0; Reeb vector degenerate for the Fano normalization");
    if (g_xi != Rational(-(base.datum.n + 1)) && opt.auto_rescale) {
        ctx.rescale = Rational(base.datum.n + 1) / (-g_xi);
        if (*ctx.rescale <= 0)
            throw ObstructionError("gamma_0(xi) = " + g_xi.str() + " has the wrong sign; no positive " +
                                   "rescale reaches gamma_0(xi) = -(n+1)");
        xi = scale(*ctx.rescale, xi);
    }
    ctx.xi = xi;
    ctx.cp = characteristic_polytope(base.cone, xi, ctx.gamma0.gamma0, opt.chart);
    ctx.cp_fano = translate_fano(ctx.cp, ctx.gamma0.gamma0);
    const MomentEngine engine(ctx.cp);
    ctx.moments = engine.moments();
    return ctx;
}

// ---- commands --------------------------------------------------------------

struct CommandResult {
    Json report;
    int exit_code = 0;
};

inline CommandResult run_validate(const LoadedInput& input, const RunOptions& opt) {
    const auto base = build_base(input.spec);
    const auto report = validate_good_cone(base.cone);
    CommandResult out;
    out.report["validation"] = to_json(report);
    out.report["provenance"] = provenance(input, opt);
    out.exit_code = report.good() ? 0 : 2;
    return out;
}

inline CommandResult run_gamma0(const LoadedInput& input, const RunOptions& opt) {
    const auto base = build_base(input.spec);
    CommandResult out;
    out.report["provenance"] = provenance(input, opt);
    const auto g = solve_gamma0(base.cone, input.spec.reeb);
    Json gj;
    gj["gamma0"] = to_json(g.gamma0);
    Json res = Json::array();
    for (const auto& r : g.residuals) res.push_back(r.str());
    gj["residuals"] = res;
    if (g.gamma0_of_xi) {
        gj["gamma0_of_xi"] = g.gamma0_of_xi->str();
        const Rational target(-(base.datum.n + 1));
        if (*g.gamma0_of_xi != target) {
            const Rational factor = Rational(base.datum.n + 1) / (-*g.gamma0_of_xi);
            gj["rescale_diagnostic"] = "gamma_0(xi) = " + g.gamma0_of_xi->str() + " != " + target.str() +
                                       "; rescale xi by " + factor.str();
            gj["suggested_rescale"] = factor.str();
        }
    }
    out.report["gamma0"] = gj;
    return out;
}

inline Json polytope_block(const CriterionContext& ctx) {
    Json j;
    j["chart"] = ctx.cp.chart.k + 1;
    Json pv = Json::array();
    for (const auto& t : ctx.cp.cal_p_verts.vertices) pv.push_back(to_json(ctx.cp.chart.to_ambient(t)));
    j["calP_vertices"] = pv;
    Json ppv = Json::array();
    for (const auto& t : ctx.cp.cal_p_plus_verts.vertices)
        ppv.push_back(to_json(ctx.cp.chart.to_ambient(t)));
    j["calP_plus_vertices"] = ppv;
    Json qv = Json::array();
    for (const auto& v : ctx.cp.proj_verts.vertices) qv.push_back(to_json(v));
    j["P_vertices"] = qv;
    Json qpv = Json::array();
    for (const auto& v : ctx.cp_fano.proj_plus_verts.vertices) qpv.push_back(to_json(v));
    j["P_prime_plus_vertices"] = qpv;
    Json lam = Json::array(), big = Json::array();
    for (const auto& m : ctx.cp.meta) {
        lam.push_back(m.lambda.str());
        big.push_back(m.big_lambda.str());
    }
    j["lambda_A"] = lam;
    j["Lambda_A"] = big;
    return j;
}

inline CommandResult run_polytope(const LoadedInput& input, const RunOptions& opt) {
    const auto base = build_base(input.spec);
    if (!input.spec.reeb) throw Error("reeb: missing (required by the polytope command)");
    const auto ctx = build_criterion_context(base, *input.spec.reeb, opt);
    CommandResult out;
    out.report["provenance"] = provenance(input, opt);
    out.report["gamma0"] = to_json(ctx.gamma0.gamma0);
    if (ctx.rescale) out.report["rescale_applied"] = ctx.rescale->str();
    out.report["polytope"] = polytope_block(ctx);
    return out;
}

inline Json mc_agreement_block(const MomentEngine& engine, const MomentReport& exact,
                               unsigned long long samples) {
    Json j;
    const auto& pi_poly = engine.pi();
    const auto est = engine.oracle([&](const std::vector<double>& t) { return pi_poly.eval_double(t); },
                                   samples);
    j["V_P_exact"] = to_double(exact.V_P);
    j["V_P_mc"] = est.value;
    j["V_P_se"] = est.standard_error;
    j["V_P_sigmas"] =
        est.standard_error > 0 ? std::fabs(est.value - to_double(exact.V_P)) / est.standard_error : 0.0;
    Json firsts = Json::array();
    for (std::size_t i = 0; i < engine.polytope().cone.datum.rank; ++i) {
        const Polynomial mono = engine.y_form(i) * pi_poly;
        const auto mi = engine.oracle(
            [&](const std::vector<double>& t) { return mono.eval_double(t); }, samples);
        const double exact_i = to_double(exact.bar[i] * exact.V_P);
        Json ji;
        ji["coordinate"] = i + 1;
        ji["exact"] = exact_i;
        ji["mc"] = mi.value;
        ji["se"] = mi.standard_error;
        ji["sigmas"] = mi.standard_error > 0 ? std::fabs(mi.value - exact_i) / mi.standard_error : 0.0;
        firsts.push_back(ji);
    }
    j["moments"] = firsts;
    j["samples"] = samples;
    return j;
}

inline CommandResult run_criterion(const LoadedInput& input, const RunOptions& opt) {
    const auto base = build_base(input.spec);
    if (!input.spec.reeb) throw Error("reeb: missing (required by the criterion command)");
    const auto ctx = build_criterion_context(base, *input.spec.reeb, opt);
    const MomentEngine engine(ctx.cp);
    const VSideEngine translated(ctx.cp_fano);
    const auto se = se_criterion(engine, translated, ctx.moments, ctx.gamma0.gamma0);
    const auto csc = csc_properness(engine, ctx.moments, ctx.gamma0.gamma0);

    CommandResult out;
    out.report["provenance"] = provenance(input, opt);
    out.report["validation"] = to_json(validate_good_cone(base.cone));
    out.report["gamma0"] = to_json(ctx.gamma0.gamma0);
    if (ctx.rescale) out.report["rescale_applied"] = ctx.rescale->str();
    out.report["polytope"] = polytope_block(ctx);
    out.report["moments"] = to_json(ctx.moments);
    out.report["verdict"] = to_json(se.verdict);
    out.report["verdict_dual_route"] = to_json(se.dual_route);
    out.report["futaki"] = to_json(se.futaki);
    out.report["csc_properness"] = to_json(csc);
    if (opt.mc_check) out.report["mc_check"] = mc_agreement_block(engine, ctx.moments, *opt.mc_check);
    out.exit_code = se.verdict.holds ? 0 : 2;
    return out;
}

inline CommandResult run_soliton(const LoadedInput& input, const RunOptions& opt,
                                 std::optional<Vec> xi_override = std::nullopt) {
    const auto base = build_base(input.spec);
    Vec xi = xi_override ? *xi_override
                         : (input.spec.reeb ? *input.spec.reeb
                                            : throw Error("reeb: missing (required by the soliton command)"));
    const auto ctx = build_criterion_context(base, xi, opt);
    const MomentEngine engine(ctx.cp);
    const auto soliton = solve_soliton(engine, ctx.gamma0.gamma0, opt.tol, opt.quad_depth);

    CommandResult out;
    out.report["provenance"] = provenance(input, opt);
    out.report["gamma0"] = to_json(ctx.gamma0.gamma0);
    if (ctx.rescale) out.report["rescale_applied"] = ctx.rescale->str();
    out.report["xi"] = to_json(ctx.xi);
    out.report["soliton"] = to_json(soliton);
    if (opt.mc_check) {
        // cross-check the weighted mass against the oracle
        Vec x_dir = zero_vec(base.datum.rank);
        for (std::size_t i = 0; i < soliton.x_directions.size(); ++i)
            x_dir = add(x_dir, scale(Rational(soliton.x_coords[i]), soliton.x_directions[i]));
        const auto weight = engine.exp_weight_function(x_dir);
        const auto& pi_poly = engine.pi();
        const auto est = engine.oracle(
            [&](const std::vector<double>& t) { return weight(t) * pi_poly.eval_double(t); },
            *opt.mc_check);
        const auto adaptive = engine.exp_weighted_moments(x_dir, opt.tol, opt.quad_depth);
        Json mc;
        mc["mass_adaptive"] = adaptive.mass;
        mc["mass_mc"] = est.value;
        mc["mass_se"] = est.standard_error;
        mc["mass_sigmas"] =
            est.standard_error > 0 ? std::fabs(est.value - adaptive.mass) / est.standard_error : 0.0;
        mc["samples"] = *opt.mc_check;
        out.report["mc_check"] = mc;
    }
    out.exit_code = soliton.verdict.holds ? 0 : 2;
    return out;
}

struct SweepSpec {
    std::size_t vary_coord = 1; // 0-based ambient coordinate of xi
    Rational from{0}, to{0};
    std::size_t steps = 2;
    Rational resolution{1, 1000};
};

inline CommandResult run_sweep(const LoadedInput& input, const RunOptions& opt, const SweepSpec& sweep) {
    const auto base = build_base(input.spec);
    if (!input.spec.reeb) throw Error("reeb: missing (required by the sweep command)");
    const Vec base_xi = *input.spec.reeb;
    if (sweep.vary_coord >= base_xi.size()) throw Error("sweep coordinate out of range");
    const auto gamma0 = solve_gamma0(base.cone);

    auto path = [&](const Rational& t) {
        Vec xi = base_xi;
        xi[sweep.vary_coord] = t;
        return xi;
    };
    std::vector<Rational> params;
    if (sweep.steps < 2) throw Error("sweep needs at least 2 steps");
    for (std::size_t i = 0; i < sweep.steps; ++i)
        params.push_back(sweep.from +
                         (sweep.to - sweep.from) * Rational(static_cast<long>(i)) /
                             Rational(static_cast<long>(sweep.steps - 1)));

    const auto result = reeb_sweep(base.cone, gamma0.gamma0, path, params, sweep.resolution, opt.tol,
                                   opt.quad_depth, opt.timings, opt.chart);

    CommandResult out;
    out.report["provenance"] = provenance(input, opt);
    out.report["gamma0"] = to_json(gamma0.gamma0);
    Json records = Json::array();
    for (const auto& rec : result.records) {
        Json rj;
        rj["parameter"] = rec.parameter.str();
        rj["xi"] = to_json(rec.xi);
        rj["in_sigma_o"] = rec.in_sigma_o;
        rj["skipped"] = rec.skipped;
        if (!rec.skipped) {
            rj["holds"] = rec.soliton.verdict.holds;
            rj["margin"] = rec.soliton.verdict.margin_d;
            rj["bar_X"] = to_json(rec.soliton.bar_x);
            rj["bar_X_proj"] = to_json(rec.soliton.bar_x_proj);
            rj["lambda"] = to_json(rec.soliton.x_coords);
        }
        if (opt.timings) rj["milliseconds"] = rec.milliseconds;
        records.push_back(rj);
    }
    out.report["records"] = records;
    Json transitions = Json::array();
    for (const auto& [lo, hi] : result.transitions) {
        Json tj;
        tj["bracket_low"] = lo.str();
        tj["bracket_high"] = hi.str();
        transitions.push_back(tj);
    }
    out.report["transitions"] = transitions;
    return out;
}

inline CommandResult run_kenergy(const LoadedInput& input, const RunOptions& opt) {
    const auto base = build_base(input.spec);
    if (!input.spec.reeb) throw Error("reeb: missing (required by the kenergy command)");
    const auto ctx = build_criterion_context(base, *input.spec.reeb, opt);
    const MomentEngine engine(ctx.cp);
    const VSideEngine vside(ctx.cp_fano);
    const auto se = se_criterion(engine, vside, ctx.moments, ctx.gamma0.gamma0);

    CommandResult out;
    out.report["provenance"] = provenance(input, opt);
    out.report["verdict"] = to_json(se.verdict);

    const auto guillemin = build_guillemin(ctx.cp_fano);
    Json kj;
    { // N(u_0) with the epsilon ladder
        NonlinearParams params;
        const auto n0 = nonlinear_part_N(vside, guillemin.u_0, std::nullopt, params);
        kj["N_u0"] = n0.value;
        kj["N_u0_error"] = n0.error_bound;
        kj["N_u0_ladder"] = to_json(n0.ladder);
        const auto l0 = linear_part_L(vside, guillemin.u_0, std::nullopt);
        kj["L_u0"] = l0.value_d;
        kj["mu_u0"] = l0.value_d + n0.value;
    }
    if (!base.datum.simple_roots.empty()) {
        const auto identity = pl_identity(vside, 0, se.verdict.coeffs);
        Json ij;
        ij["lambda1"] = identity.lambda1.str();
        ij["alpha_norm2"] = identity.alpha_norm2.str();
        ij["printed_value"] = identity.printed.str();
        ij["computed_L"] = identity.computed.str();
        ij["calibration_constant"] = identity.calibration.str();
        kj["pl_identity"] = ij;

        const auto necessary = necessary_test_function(ctx.cp_fano, se.verdict.coeffs);
        Json nj;
        nj["criterion_holds"] = necessary.criterion_holds;
        if (!necessary.criterion_holds) {
            nj["root_index"] = necessary.root_index + 1;
            nj["lambda"] = necessary.lambda.str();
            nj["predicted_sign"] = necessary.predicted_sign;
        } else {
            nj["note"] = "criterion holds; no violating test function";
        }
        kj["necessary_test_function"] = nj;

        if (se.verdict.holds) {
            const auto scan = positivity_scan(vside, opt.scan_count, opt.seed);
            Json sj;
            sj["count"] = scan.count;
            sj["min_L"] = scan.min_value.str();
            sj["violation_found"] = scan.witness.has_value();
            kj["positivity_scan"] = sj;
        } else {
            kj["positivity_scan"] = "skipped: criterion does not hold";
        }
    }
    out.report["kenergy"] = kj;
    out.exit_code = se.verdict.holds ? 0 : 2;
    return out;
}

} // namespace sasaki
