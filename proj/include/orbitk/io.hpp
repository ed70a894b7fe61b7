#pragma once

// Serialization for orbits, reports, families, and curves. Emission is
// hand-rolled with fixed %.17g formatting so identical inputs produce
// byte-identical files; parsing goes through nlohmann::json. Data files
// carry no timestamps.

#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "orbitk/errors.hpp"
#include "orbitk/monodromy.hpp"
#include "orbitk/orbit.hpp"
#include "orbitk/shooting.hpp"

namespace orbitk {

inline std::string fmt_g17(double v) {
    if (v == 0.0) return "0"; // canonical zero: "-0" would not round-trip as a double
    char b[40];
    std::snprintf(b, sizeof b, "%.17g", v);
    return b;
}

inline std::string fmt_g6(double v) {
    if (v == 0.0) return "0";
    char b[40];
    std::snprintf(b, sizeof b, "%.6g", v);
    return b;
}

inline std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char b[8];
                    std::snprintf(b, sizeof b, "\\u%04x", c);
                    out += b;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

namespace detail {

inline void jkv(std::string& s, const char* key, const std::string& raw, bool quoted) {
    s += '"';
    s += key;
    s += "\":";
    if (quoted) {
        s += '"';
        s += json_escape(raw);
        s += '"';
    } else {
        s += raw;
    }
}

inline std::string jarr(const Vec4& v) {
    return "[" + fmt_g17(v[0]) + "," + fmt_g17(v[1]) + "," + fmt_g17(v[2]) + "," +
           fmt_g17(v[3]) + "]";
}

inline std::string jsl2(const RealSL2& m) {
    return "{\"a\":" + fmt_g17(m.a) + ",\"b\":" + fmt_g17(m.b) + ",\"c\":" + fmt_g17(m.c) +
           ",\"d\":" + fmt_g17(m.d) + "}";
}

inline std::string jsign(const std::optional<KreinSign>& s) {
    return s ? std::string("\"") + to_string(*s) + "\"" : "null";
}

} // namespace detail

inline std::string orbit_to_json(const Orbit& o, bool include_samples = true) {
    std::string s = "{\"schema\":\"orbit-krein/1\",\"kind\":\"orbit\",";
    detail::jkv(s, "system", o.system, true);
    s += ',';
    detail::jkv(s, "id", o.id, true);
    s += ',';
    detail::jkv(s, "energy", fmt_g17(o.energy), false);
    s += ',';
    detail::jkv(s, "period", fmt_g17(o.period), false);
    s += ",\"initial_state\":" + detail::jarr(o.initial_state.vec()) + ',';
    detail::jkv(s, "closure_residual", fmt_g17(o.closure_residual), false);
    s += ",\"certificate\":{\"sym_inv\":" + std::to_string(o.certificate.sym_inv) +
         ",\"sym_residual\":" + fmt_g17(o.certificate.sym_residual) +
         ",\"doubly\":" + (o.certificate.doubly ? "true" : "false") +
         ",\"dsym_inv\":" + std::to_string(o.certificate.dsym_inv) +
         ",\"dsym_residual\":" + fmt_g17(o.certificate.dsym_residual) + "}";
    if (include_samples) {
        s += ",\"samples\":{\"t\":[";
        for (std::size_t i = 0; i < o.sample_t.size(); ++i) {
            if (i) s += ',';
            s += fmt_g17(o.sample_t[i]);
        }
        s += "],\"x\":[";
        for (std::size_t i = 0; i < o.sample_x.size(); ++i) {
            if (i) s += ',';
            s += detail::jarr(o.sample_x[i].vec());
        }
        s += "]}";
    }
    s += "}\n";
    return s;
}

inline std::string report_to_json(const MonodromyReport& r) {
    std::string s = "{\"schema\":\"orbit-krein/1\",\"kind\":\"monodromy_report\",";
    detail::jkv(s, "system", r.system, true);
    s += ',';
    detail::jkv(s, "orbit_id", r.orbit_id, true);
    s += ",\"doubly_symmetric\":";
    s += r.doubly_symmetric ? "true" : "false";
    s += ',';
    detail::jkv(s, "period", fmt_g17(r.period), false);
    s += ',';
    detail::jkv(s, "energy", fmt_g17(r.energy), false);
    s += ',';
    detail::jkv(s, "trace", fmt_g17(r.trace), false);
    s += ',';
    detail::jkv(s, "classification", to_string(r.classification), true);
    s += ',';
    detail::jkv(s, "cz_parity", to_string(r.cz_parity), true);
    s += ",\"b_sign_0\":" + detail::jsign(r.b_sign_0);
    s += ",\"b_sign_half\":" + detail::jsign(r.b_sign_half);
    s += ",\"monodromy\":[";
    for (int i = 0; i < 16; ++i) {
        if (i) s += ',';
        s += fmt_g17(r.monodromy[i]);
    }
    s += "],\"half_first\":" + detail::jsl2(r.half_first);
    s += ",\"half_second\":" + detail::jsl2(r.half_second);
    s += ",\"reduced_0\":" + detail::jsl2(r.reduced_0);
    s += ",\"reduced_half\":" + detail::jsl2(r.reduced_half);
    const ReportResiduals& q = r.residuals;
    s += ",\"residuals\":{";
    const std::pair<const char*, double> rows[] = {
        {"fixed_set_0", q.fixed_set_0}, {"fixed_set_half", q.fixed_set_half},
        {"frame_0", q.frame_0},         {"frame_half", q.frame_half},
        {"coninv_0", q.coninv_0},       {"coninv_half", q.coninv_half},
        {"slr_0", q.slr_0},             {"slr_half", q.slr_half},
        {"product_0", q.product_0},     {"product_half", q.product_half},
        {"couple", q.couple},           {"trace_gap", q.trace_gap},
        {"field_fix", q.field_fix},     {"return_gap", q.return_gap},
        {"energy_drift", q.energy_drift}, {"symplectic", q.symplectic},
    };
    bool first = true;
    for (const auto& [k, v] : rows) {
        if (!first) s += ',';
        first = false;
        detail::jkv(s, k, fmt_g17(v), false);
    }
    s += "}}\n";
    return s;
}

// --- parsing ------------------------------------------------------------------

inline nlohmann::json parse_schema_json(const std::string& text, const std::string& kind) {
    const nlohmann::json j = nlohmann::json::parse(text); // parse_error on bad input
    if (!j.is_object() || j.value("schema", "") != std::string("orbit-krein/1"))
        throw Error("expected an orbit-krein/1 document");
    if (j.value("kind", "") != kind)
        throw Error("expected kind \"" + kind + "\", got \"" + j.value("kind", "") + "\"");
    return j;
}

inline Orbit orbit_from_json(const std::string& text) {
    const nlohmann::json j = parse_schema_json(text, "orbit");
    Orbit o;
    o.system = j.at("system").get<std::string>();
    o.id = j.at("id").get<std::string>();
    o.energy = j.at("energy").get<double>();
    o.period = j.at("period").get<double>();
    const auto x0 = j.at("initial_state");
    if (!x0.is_array() || x0.size() != 4) throw Error("initial_state must have 4 entries");
    o.initial_state = {x0[0].get<double>(), x0[1].get<double>(), x0[2].get<double>(),
                       x0[3].get<double>()};
    o.closure_residual = j.value("closure_residual", 0.0);
    if (j.contains("certificate")) {
        const auto& c = j.at("certificate");
        o.certificate.sym_inv = c.value("sym_inv", -1);
        o.certificate.sym_residual = c.value("sym_residual", 0.0);
        o.certificate.doubly = c.value("doubly", false);
        o.certificate.dsym_inv = c.value("dsym_inv", -1);
        o.certificate.dsym_residual = c.value("dsym_residual", 0.0);
    }
    if (j.contains("samples")) {
        const auto& sm = j.at("samples");
        for (const auto& t : sm.at("t")) o.sample_t.push_back(t.get<double>());
        for (const auto& row : sm.at("x")) {
            if (!row.is_array() || row.size() != 4) throw Error("sample rows must have 4 entries");
            o.sample_x.push_back({row[0].get<double>(), row[1].get<double>(),
                                  row[2].get<double>(), row[3].get<double>()});
        }
        if (o.sample_t.size() != o.sample_x.size())
            throw Error("sample time and state counts differ");
    }
    return o;
}

inline OrbitClass orbit_class_from_string(const std::string& s) {
    if (s == "positive-hyperbolic") return OrbitClass::PositiveHyperbolic;
    if (s == "negative-hyperbolic") return OrbitClass::NegativeHyperbolic;
    if (s == "elliptic") return OrbitClass::Elliptic;
    if (s == "degenerate-plus") return OrbitClass::DegeneratePlus;
    if (s == "degenerate-minus") return OrbitClass::DegenerateMinus;
    throw Error("unknown classification \"" + s + "\"");
}

inline RealSL2 sl2_from_json(const nlohmann::json& j) {
    return {j.at("a").get<double>(), j.at("b").get<double>(), j.at("c").get<double>(),
            j.at("d").get<double>()};
}

/// Reads back the fields the counting and certificate tools need; the full
/// 4x4 and residual block are restored when present.
inline MonodromyReport report_from_json(const std::string& text) {
    const nlohmann::json j = parse_schema_json(text, "monodromy_report");
    MonodromyReport r;
    r.system = j.value("system", "");
    r.orbit_id = j.value("orbit_id", "");
    r.doubly_symmetric = j.value("doubly_symmetric", false);
    r.period = j.value("period", 0.0);
    r.energy = j.value("energy", 0.0);
    r.trace = j.at("trace").get<double>();
    r.classification = orbit_class_from_string(j.at("classification").get<std::string>());
    if (j.contains("b_sign_0") && !j.at("b_sign_0").is_null())
        r.b_sign_0 = j.at("b_sign_0").get<std::string>() == "+" ? KreinSign::Plus
                                                                : KreinSign::Minus;
    if (j.contains("b_sign_half") && !j.at("b_sign_half").is_null())
        r.b_sign_half = j.at("b_sign_half").get<std::string>() == "+" ? KreinSign::Plus
                                                                      : KreinSign::Minus;
    const std::string par = j.value("cz_parity", "undefined");
    r.cz_parity = par == "even" ? CZParity::Even
                  : par == "odd" ? CZParity::Odd
                                 : CZParity::Undefined;
    if (j.contains("half_first")) r.half_first = sl2_from_json(j.at("half_first"));
    if (j.contains("half_second")) r.half_second = sl2_from_json(j.at("half_second"));
    if (j.contains("reduced_0")) r.reduced_0 = sl2_from_json(j.at("reduced_0"));
    if (j.contains("reduced_half")) r.reduced_half = sl2_from_json(j.at("reduced_half"));
    if (j.contains("monodromy")) {
        const auto& m = j.at("monodromy");
        if (!m.is_array() || m.size() != 16) throw Error("monodromy must have 16 entries");
        for (int i = 0; i < 16; ++i) r.monodromy[i] = m[i].get<double>();
    }
    return r;
}

// --- tabular and plot output ---------------------------------------------------

inline std::string family_csv(const FamilyResult& fam) {
    std::string s = "energy,q1_start,period,trace,b_sign_0,b_sign_half,class\n";
    for (const FamilyMember& m : fam.members) {
        s += fmt_g17(m.energy) + ',' + fmt_g17(m.shoot.coord) + ',' +
             fmt_g17(m.shoot.orbit.period) + ',' + fmt_g17(m.report.trace) + ',';
        s += m.report.b_sign_0 ? to_string(*m.report.b_sign_0) : "";
        s += ',';
        s += m.report.b_sign_half ? to_string(*m.report.b_sign_half) : "";
        s += ',';
        s += to_string(m.report.classification);
        s += '\n';
    }
    return s;
}

/// Sample table; `space` tags a non-base coordinate system ("lc") in a
/// comment line ahead of the header.
inline std::string trajectory_csv(const Orbit& o, const std::string& space = "") {
    std::string s;
    if (!space.empty()) s += "# space=" + space + "\n";
    s += "t,q1,q2,p1,p2\n";
    for (std::size_t i = 0; i < o.sample_t.size(); ++i) {
        const Vec4 v = o.sample_x[i].vec();
        s += fmt_g17(o.sample_t[i]) + ',' + fmt_g17(v[0]) + ',' + fmt_g17(v[1]) + ',' +
             fmt_g17(v[2]) + ',' + fmt_g17(v[3]) + '\n';
    }
    return s;
}

/// Configuration-space polyline, viewbox from the data bounds plus a 5%
/// margin. The y axis is flipped into screen coordinates at emission.
inline std::string orbit_svg(const Orbit& o) {
    if (o.sample_x.empty()) throw Error("no samples to plot");
    double xlo = o.sample_x[0].q1, xhi = xlo, ylo = o.sample_x[0].q2, yhi = ylo;
    for (const State4& x : o.sample_x) {
        xlo = std::min(xlo, x.q1);
        xhi = std::max(xhi, x.q1);
        ylo = std::min(ylo, x.q2);
        yhi = std::max(yhi, x.q2);
    }
    const double mx = 0.05 * std::max(xhi - xlo, 1e-12);
    const double my = 0.05 * std::max(yhi - ylo, 1e-12);
    xlo -= mx;
    xhi += mx;
    ylo -= my;
    yhi += my;
    const double w = xhi - xlo, h = yhi - ylo;
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" "
                    "width=\"640\" height=\"640\" viewBox=\"" +
                    fmt_g6(xlo) + " " + fmt_g6(-yhi) + " " + fmt_g6(w) + " " + fmt_g6(h) +
                    "\">\n";
    s += "<title>" + json_escape(o.id) + "</title>\n";
    s += "<polyline fill=\"none\" stroke=\"#1f6feb\" stroke-width=\"" +
         fmt_g6(0.004 * std::max(w, h)) + "\" points=\"";
    for (std::size_t i = 0; i < o.sample_x.size(); ++i) {
        if (i) s += ' ';
        s += fmt_g6(o.sample_x[i].q1) + "," + fmt_g6(-o.sample_x[i].q2);
    }
    s += "\"/>\n</svg>\n";
    return s;
}

// --- files ---------------------------------------------------------------------

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path + " for writing");
    f << content;
    if (!f) throw Error("write failed for " + path);
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path);
    std::string s((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return s;
}

} // namespace orbitk
