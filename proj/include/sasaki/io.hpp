#pragma once

#include "sasaki/verdict.hpp"

#include "json.hpp"

#include <fstream>
#include <optional>
#include <sstream>
#include <string>

namespace sasaki {

using Json = nlohmann::json;

struct InputSpec {
    GroupDatumInput group;
    std::vector<Vec> cone_normals;
    std::optional<Vec> reeb;
    std::string name;
};

namespace io_detail {

inline Rational parse_rational_field(const Json& j, const std::string& path) {
    if (j.is_number_integer()) return Rational(j.get<long long>());
    if (j.is_string()) {
        try {
            return parse_rational(j.get<std::string>());
        } catch (const Error& e) {
            throw Error(path + ": " + e.what());
        }
    }
    throw Error(path + ": expected an integer or a rational string \"p/q\"");
}

inline Vec parse_vector(const Json& j, const std::string& path, std::optional<std::size_t> want = {}) {
    if (!j.is_array()) throw Error(path + ": expected an array");
    Vec v;
    for (std::size_t i = 0; i < j.size(); ++i)
        v.push_back(parse_rational_field(j[i], path + "[" + std::to_string(i) + "]"));
    if (want && v.size() != *want)
        throw Error(path + ": expected " + std::to_string(*want) + " entries, found " +
                    std::to_string(v.size()));
    return v;
}

inline std::vector<Vec> parse_matrix(const Json& j, const std::string& path,
                                     std::optional<std::size_t> want_cols = {}) {
    if (!j.is_array()) throw Error(path + ": expected an array of vectors");
    std::vector<Vec> rows;
    for (std::size_t i = 0; i < j.size(); ++i)
        rows.push_back(parse_vector(j[i], path + "[" + std::to_string(i) + "]", want_cols));
    return rows;
}

inline std::string fnv1a_hex(const std::string& bytes) {
    unsigned long long h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

} // namespace io_detail

/// Parses the structured input: exact rationals, dimension checks, and
/// path-qualified error messages.
inline InputSpec parse_input(const Json& j) {
    InputSpec spec;
    if (!j.is_object()) throw Error("input: expected a JSON object");
    if (!j.contains("group")) throw Error("group: missing");
    const auto& g = j.at("group");
    if (!g.contains("rank") || !g.at("rank").is_number_integer() || g.at("rank").get<long>() <= 0)
        throw Error("group.rank: expected a positive integer");
    spec.group.rank = g.at("rank").get<std::size_t>();
    spec.group.positive_roots =
        io_detail::parse_matrix(g.value("positive_roots", Json::array()), "group.positive_roots",
                                spec.group.rank);
    if (!g.contains("center_basis")) throw Error("group.center_basis: missing");
    spec.group.center_basis =
        io_detail::parse_matrix(g.at("center_basis"), "group.center_basis", spec.group.rank);
    if (g.contains("lattice_basis"))
        spec.group.lattice_basis =
            io_detail::parse_matrix(g.at("lattice_basis"), "group.lattice_basis", spec.group.rank);
    if (g.contains("gram")) {
        const auto rows = io_detail::parse_matrix(g.at("gram"), "group.gram", spec.group.rank);
        if (rows.size() != spec.group.rank) throw Error("group.gram: expected a square matrix");
        spec.group.gram = Mat(rows.begin(), rows.end());
    }
    if (!j.contains("cone") || !j.at("cone").contains("normals"))
        throw Error("cone.normals: missing");
    spec.cone_normals = io_detail::parse_matrix(j.at("cone").at("normals"), "cone.normals", spec.group.rank);
    if (j.contains("reeb")) spec.reeb = io_detail::parse_vector(j.at("reeb"), "reeb", spec.group.rank);
    spec.name = j.value("name", "");
    return spec;
}

struct LoadedInput {
    InputSpec spec;
    std::string content_hash; // FNV-1a of the raw bytes
    std::string path;
};

inline LoadedInput load_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open input file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    const std::string bytes = buffer.str();
    Json j;
    try {
        j = Json::parse(bytes);
    } catch (const Json::parse_error& e) {
        throw Error(path + ": " + e.what());
    }
    LoadedInput loaded;
    loaded.spec = parse_input(j);
    loaded.content_hash = io_detail::fnv1a_hex(bytes);
    loaded.path = path;
    return loaded;
}

// ---- report serialization -------------------------------------------------

inline Json to_json(const Rational& q) { return q.str(); }

inline Json to_json(const Vec& v) {
    Json a = Json::array();
    for (const auto& q : v) a.push_back(q.str());
    return a;
}

inline Json to_json(const std::vector<double>& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(x);
    return a;
}

inline Json to_json(const Verdict& v) {
    Json j;
    j["kind"] = v.kind;
    j["holds"] = v.holds;
    j["confidence"] = v.confidence;
    if (!v.b.empty()) {
        j["criterion_vector"] = to_json(v.b);
        j["simple_root_coeffs"] = to_json(v.coeffs);
        j["off_span_residual_norm2"] = to_json(v.off_span_residual2);
        j["margin"] = to_json(v.margin);
    }
    j["criterion_vector_float"] = to_json(v.b_d);
    j["simple_root_coeffs_float"] = to_json(v.coeffs_d);
    j["margin_float"] = v.margin_d;
    j["off_span_residual_norm2_float"] = v.off_span_residual2_d;
    if (v.error_bound > 0) j["error_bound"] = v.error_bound;
    if (!v.diagnostics.empty()) j["diagnostics"] = v.diagnostics;
    return j;
}

inline Json to_json(const ValidationReport& r) {
    Json j;
    j["good"] = r.good();
    j["c1_primitive"] = r.c1_primitive;
    j["c1_by_facet"] = r.c1_by_facet;
    j["c2_faces"] = r.c2_faces;
    j["apex_checked"] = r.apex_checked;
    j["apex_unimodular"] = r.apex_unimodular;
    j["w_invariant"] = r.w_invariant;
    j["root_integrality"] = r.root_integrality;
    j["minimal"] = r.minimal;
    j["redundant_facets"] = r.redundant_facets;
    j["full_dimensional"] = r.full_dimensional;
    j["pointed"] = r.pointed;
    Json faces = Json::array();
    for (const auto& f : r.faces) {
        Json fj;
        fj["active_facets"] = f.active;
        fj["dim"] = f.dim;
        fj["simple"] = f.simple;
        fj["unimodular"] = f.unimodular;
        Json divs = Json::array();
        for (const auto& d : f.divisors) divs.push_back(d.str());
        fj["divisors"] = divs;
        faces.push_back(fj);
    }
    j["faces"] = faces;
    if (!r.notes.empty()) j["notes"] = r.notes;
    return j;
}

inline Json to_json(const MomentReport& m) {
    Json j;
    j["V_P"] = to_json(m.V_P);
    j["bar"] = to_json(m.bar);
    j["bar_proj"] = to_json(m.bar_proj);
    j["tilde_bar"] = to_json(m.tilde_bar);
    j["tilde_bar_ambient"] = to_json(m.tilde_bar_ambient);
    j["barS"] = to_json(m.barS);
    j["chart"] = m.chart_k + 1; // 1-based in reports
    j["weight"] = m.weight;
    return j;
}

inline Json to_json(const FutakiReport& f) {
    Json j;
    j["vanishes"] = f.vanishes;
    j["xi_residual"] = to_json(f.xi_residual);
    Json dirs = Json::array(), res = Json::array();
    for (const auto& d : f.directions) dirs.push_back(to_json(d));
    for (const auto& r : f.residuals) res.push_back(r.str());
    j["directions"] = dirs;
    j["residuals"] = res;
    return j;
}

inline Json to_json(const CscReport& c) {
    Json j;
    j["tilde_bar_condition"] = to_json(c.tilde_bar_condition);
    j["gap_condition"] = to_json(c.gap_condition);
    j["scalar_gap"] = to_json(c.scalar_gap);
    j["scalar_positive"] = c.scalar_positive;
    j["min_Lambda"] = to_json(c.min_lambda);
    j["automatic_under_fano"] = c.automatic_under_fano;
    return j;
}

inline Json to_json(const SolitonResult& s) {
    Json j;
    j["exact_path"] = s.exact_path;
    j["x_coords"] = to_json(s.x_coords);
    j["x_ambient"] = to_json(s.x_ambient);
    j["bar_X"] = to_json(s.bar_x);
    j["bar_X_proj"] = to_json(s.bar_x_proj);
    j["quadrature_error"] = s.quadrature_error;
    j["newton_residual"] = s.residual_norm;
    j["full_condition_residuals"] = to_json(s.full_condition_residuals);
    j["verdict"] = to_json(s.verdict);
    Json trace = Json::array();
    for (const auto& t : s.trace) {
        Json tj;
        tj["residual"] = t.residual_norm;
        tj["step"] = t.step_norm;
        tj["halvings"] = t.halvings;
        tj["jacobian_pd"] = t.jacobian_pd;
        trace.push_back(tj);
    }
    j["newton_trace"] = trace;
    return j;
}

/// Flat key:value text rendering of a report tree; arrays print inline and
/// sweep tables come out row per record.
inline void render_text(const Json& j, std::ostream& os, const std::string& prefix = "") {
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it)
            render_text(it.value(), os, prefix.empty() ? it.key() : prefix + "." + it.key());
    } else if (j.is_array() && !j.empty() && j[0].is_object()) {
        for (std::size_t i = 0; i < j.size(); ++i)
            render_text(j[i], os, prefix + "[" + std::to_string(i) + "]");
    } else {
        os << prefix << " = " << j.dump() << "\n";
    }
}

} // namespace sasaki
