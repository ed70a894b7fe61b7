// orbitk command line. Subcommands wrap the library end to end: classify a
// 2x2 return map, shoot for (doubly) symmetric orbits, continue a family in
// energy, re-analyze a stored orbit, count chi_SFT over report files, lift a
// curve through the Levi-Civita cover, and run a built-in invariant suite.
//
// Exit codes: 0 success, 1 usage or parse failure, 2 math-domain failure,
// 3 root or event not found, 4 continuation stalled (partial output is
// still written), 5 topological obstruction (even winding).
//
// A --config file supplies defaults for the chosen subcommand; explicit
// flags override config keys one for one. Unknown keys are rejected.

#include <algorithm>
#include <cmath>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "orbitk/io.hpp"
#include "orbitk/levi_civita.hpp"

using namespace orbitk;

namespace {

struct CliUsage {
    std::string msg;
};

SystemDef lookup_system(const std::string& name) {
    try {
        return system_by_name(name);
    } catch (const Error& e) {
        throw CliUsage(e.what());
    }
}

Orbit load_orbit(const std::string& path) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const Error& e) {
        throw CliUsage(e.what());
    }
    try {
        return orbit_from_json(text);
    } catch (const Error& e) {
        throw CliUsage(path + ": " + e.what());
    }
}

int branch_from_name(const std::string& s) { return s == "retro" ? -1 : 1; }

std::string sign_text(const std::optional<KreinSign>& s) {
    return s ? to_string(*s) : "undefined";
}

// --- config file ----------------------------------------------------------

std::string config_scalar(const nlohmann::json& v) {
    return v.is_string() ? v.get<std::string>() : v.dump();
}

/// Expands --config <file.json> into argv tokens inserted directly after the
/// subcommand, before the user's own flags. Later occurrences win, so
/// explicit flags override config keys; keys that match no option are
/// rejected by the parser.
std::vector<std::string> inject_config(std::vector<std::string> args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw CliUsage("--config needs a file path");
            path = args[i + 1];
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            break;
        }
    }
    if (path.empty() || args.empty() || args[0].rfind("-", 0) == 0) return args;

    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const Error& e) {
        throw CliUsage(e.what());
    } catch (const nlohmann::json::exception& e) {
        throw CliUsage(path + ": " + e.what());
    }
    if (!j.is_object()) throw CliUsage(path + ": config must be a JSON object");

    std::vector<std::string> inj;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const nlohmann::json& v = *it;
        if (v.is_object() || v.is_null())
            throw CliUsage("config key \"" + it.key() + "\" has an unsupported value type");
        if (v.is_boolean()) {
            if (v.get<bool>()) inj.push_back("--" + it.key());
            continue;
        }
        inj.push_back("--" + it.key());
        if (v.is_array()) {
            std::string joined;
            for (std::size_t k = 0; k < v.size(); ++k) {
                if (k) joined += ',';
                joined += config_scalar(v[k]);
            }
            inj.push_back(joined);
        } else {
            inj.push_back(config_scalar(v));
        }
    }
    std::vector<std::string> out;
    out.push_back(args[0]);
    out.insert(out.end(), inj.begin(), inj.end());
    out.insert(out.end(), args.begin() + 1, args.end());
    return out;
}

// --- subcommand bodies ------------------------------------------------------

int run_classify(const std::vector<double>& m) {
    const RealSL2 a = make_sl2(m[0], m[1], m[2], m[3]);
    const OrbitClass cls = classify(a);
    std::string sign = "undefined";
    try {
        sign = to_string(real_krein_sign(a));
    } catch (const DegenerateTrace&) {
        // classification already names the degenerate band
    }
    std::cout << to_string(cls) << ", B-sign " << sign << "\n";
    return 0;
}

int run_shoot(const std::string& sys, double energy, const std::vector<double>& bracket,
              int branch, int occurrence, int grid, const std::string& out_orbit,
              const std::string& out_report, const std::string& out_svg) {
    const SystemDef s = lookup_system(sys);
    ShootOptions so;
    so.occurrence = occurrence;
    so.grid = grid;
    const ShootResult r = shoot_doubly_symmetric(s, energy, bracket[0], bracket[1], branch, so);
    const MonodromyReport rep = symmetric_orbit_report(s, r.orbit);

    write_text_file(out_orbit, orbit_to_json(r.orbit));
    write_text_file(out_report, report_to_json(rep));
    std::cout << r.orbit.id << ": period " << fmt_g17(r.orbit.period) << ", trace "
              << fmt_g17(rep.trace) << ", " << to_string(rep.classification) << ", B-signs "
              << sign_text(rep.b_sign_0) << "/" << sign_text(rep.b_sign_half) << "\n";
    std::cout << "wrote " << out_orbit << "\n";
    std::cout << "wrote " << out_report << "\n";
    if (!out_svg.empty()) {
        write_text_file(out_svg, orbit_svg(r.orbit));
        std::cout << "wrote " << out_svg << "\n";
    }
    return 0;
}

std::string family_report_json(const FamilyResult& fam, const std::string& sys,
                               double lo, double hi, double step, int branch) {
    std::vector<std::pair<MonodromyReport, int>> entries;
    int degenerate = 0;
    for (const FamilyMember& m : fam.members) {
        const OrbitClass c = m.report.classification;
        if (c == OrbitClass::DegeneratePlus || c == OrbitClass::DegenerateMinus) {
            ++degenerate;
            continue;
        }
        entries.push_back({m.report, 1});
    }
    std::optional<int> chi;
    if (!entries.empty()) chi = sft_euler_characteristic(entries);

    const FamilyMember* stable = nullptr;
    if (chi && *chi < 0)
        for (const FamilyMember& m : fam.members)
            if (m.report.classification == OrbitClass::Elliptic) {
                stable = &m;
                break;
            }

    std::string s = "{\"schema\":\"orbit-krein/1\",\"kind\":\"family_report\",";
    s += "\"system\":\"" + json_escape(sys) + "\",";
    s += "\"branch\":\"" + std::string(branch < 0 ? "retro" : "direct") + "\",";
    s += "\"energy_lo\":" + fmt_g17(lo) + ",\"energy_hi\":" + fmt_g17(hi) +
         ",\"step\":" + fmt_g17(step) + ",";
    s += "\"members\":" + std::to_string(fam.members.size()) + ",";
    s += "\"stalled\":" + std::string(fam.stalled ? "true" : "false") + ",";
    s += "\"stall_reason\":\"" + json_escape(fam.stall_reason) + "\",";
    s += "\"stalled_at\":" + (fam.stalled ? fmt_g17(fam.stalled_at) : "null") + ",";
    s += "\"chi_sft\":" + (chi ? std::to_string(*chi) : "null") + ",";
    s += "\"degenerate_excluded\":" + std::to_string(degenerate) + ",";
    if (stable)
        s += "\"stable_member\":{\"orbit_id\":\"" + json_escape(stable->shoot.orbit.id) +
             "\",\"energy\":" + fmt_g17(stable->energy) + ",\"classification\":\"" +
             to_string(stable->report.classification) + "\"},";
    else
        s += "\"stable_member\":null,";
    s += "\"transitions\":[";
    for (std::size_t i = 0; i < fam.transitions.size(); ++i) {
        const FamilyTransition& t = fam.transitions[i];
        if (i) s += ',';
        s += "{\"energy_lo\":" + fmt_g17(t.energy_lo) + ",\"energy_hi\":" + fmt_g17(t.energy_hi) +
             ",\"energy\":" + fmt_g17(t.energy) + ",\"trace\":" + fmt_g17(t.trace) +
             ",\"before\":\"" + to_string(t.before) + "\",\"after\":\"" + to_string(t.after) +
             "\"}";
    }
    s += "],\"violations\":[";
    for (std::size_t i = 0; i < fam.violations.size(); ++i) {
        if (i) s += ',';
        s += "\"" + json_escape(fam.violations[i]) + "\"";
    }
    s += "]}\n";
    return s;
}

int run_family(const std::string& sys, const std::vector<double>& range, double step,
               const std::vector<double>& bracket, int branch, const std::string& out_csv,
               const std::string& out_report) {
    const SystemDef s = lookup_system(sys);
    FamilyOptions fo;
    fo.bracket_lo = bracket[0];
    fo.bracket_hi = bracket[1];
    fo.branch = branch;

    FamilyResult fam;
    try {
        const ShootResult seed =
            shoot_doubly_symmetric(s, range[0], bracket[0], bracket[1], branch, fo.shoot);
        fam = continue_family(s, seed, range[0], range[1], step, fo);
    } catch (const ContinuationStalled& e) {
        fam.stalled = true;
        fam.stall_reason = e.what();
        fam.stalled_at = range[0];
    }

    write_text_file(out_csv, family_csv(fam));
    write_text_file(out_report, family_report_json(fam, sys, range[0], range[1], step, branch));

    const std::string rep = family_report_json(fam, sys, range[0], range[1], step, branch);
    const nlohmann::json j = nlohmann::json::parse(rep);
    std::cout << fam.members.size() << " members, " << fam.transitions.size()
              << " transitions, chi_sft ";
    if (j.at("chi_sft").is_null())
        std::cout << "undefined";
    else
        std::cout << j.at("chi_sft").get<int>();
    if (!j.at("stable_member").is_null())
        std::cout << ", stable elliptic member "
                  << j.at("stable_member").at("orbit_id").get<std::string>();
    std::cout << "\n";
    for (const std::string& v : fam.violations) std::cout << "violation: " << v << "\n";
    if (fam.stalled)
        std::cout << "stalled at energy " << fmt_g17(fam.stalled_at) << ": " << fam.stall_reason
                  << "\n";
    std::cout << "wrote " << out_csv << "\n";
    std::cout << "wrote " << out_report << "\n";
    return fam.stalled ? 4 : 0;
}

int run_monodromy(const std::string& orbit_path, const std::string& out_report) {
    const Orbit o = load_orbit(orbit_path);
    const SystemDef s = lookup_system(o.system);
    const MonodromyReport rep = symmetric_orbit_report(s, o);
    write_text_file(out_report, report_to_json(rep));
    std::cout << rep.orbit_id << ": trace " << fmt_g17(rep.trace) << ", "
              << to_string(rep.classification) << ", B-signs " << sign_text(rep.b_sign_0) << "/"
              << sign_text(rep.b_sign_half) << ", doubly symmetric "
              << (rep.doubly_symmetric ? "yes" : "no") << "\n";
    std::cout << "wrote " << out_report << "\n";
    return 0;
}

int run_euler(const std::vector<std::string>& report_paths, const std::vector<int>& covers) {
    if (!covers.empty() && covers.size() != report_paths.size())
        throw CliUsage("--covers must list one integer per report");
    std::vector<std::pair<MonodromyReport, int>> entries;
    for (std::size_t i = 0; i < report_paths.size(); ++i) {
        const int cover = covers.empty() ? 1 : covers[i];
        if (cover < 1) throw CliUsage("covers must be >= 1");
        std::string text;
        try {
            text = read_text_file(report_paths[i]);
        } catch (const Error& e) {
            throw CliUsage(e.what());
        }
        try {
            entries.push_back({report_from_json(text), cover});
        } catch (const Error& e) {
            throw CliUsage(report_paths[i] + ": " + e.what());
        }
    }
    int bad = 0;
    for (const auto& [rep, cover] : entries)
        if (is_bad(rep, cover)) ++bad;
    const int chi = sft_euler_characteristic(entries);
    std::cout << "chi_sft = " << chi;
    if (bad) std::cout << " (" << bad << " bad orbit" << (bad == 1 ? "" : "s") << " excluded)";
    std::cout << "\n";
    return 0;
}

int run_lc_lift(const std::string& orbit_path, int branch, const std::string& out_csv,
                const std::string& out_report) {
    if (branch != 1 && branch != -1) throw CliUsage("--branch must be 1 or -1");
    const Orbit o = load_orbit(orbit_path);
    const LiftReport lift = lc_lift_orbit(o, branch);

    write_text_file(out_csv, trajectory_csv(lift.orbit, "lc"));
    std::string rep = "{\"schema\":\"orbit-krein/1\",\"kind\":\"lc_lift_report\",";
    rep += "\"orbit_id\":\"" + json_escape(lift.orbit.id) + "\",";
    rep += "\"source_id\":\"" + json_escape(o.id) + "\",";
    rep += "\"branch\":" + std::to_string(branch) + ",";
    rep += "\"winding\":" + std::to_string(lift.winding) + ",";
    rep += "\"period\":" + fmt_g17(lift.orbit.period) + ",";
    rep += "\"sigma1_residual\":" + fmt_g17(lift.sigma1_residual) + ",";
    rep += "\"sigma2_residual\":" + fmt_g17(lift.sigma2_residual) + ",";
    rep += "\"closure_residual\":" + fmt_g17(lift.closure_residual) + "}\n";
    write_text_file(out_report, rep);

    std::cout << lift.orbit.id << ": winding " << lift.winding << ", sigma residuals "
              << fmt_g17(lift.sigma1_residual) << " " << fmt_g17(lift.sigma2_residual)
              << ", closure " << fmt_g17(lift.closure_residual) << "\n";
    std::cout << "wrote " << out_csv << "\n";
    std::cout << "wrote " << out_report << "\n";
    return 0;
}

int run_selfcheck() {
    int failures = 0;
    const auto check = [&](const char* name, bool ok, const std::string& detail) {
        std::cout << (ok ? "ok   " : "FAIL ") << name;
        if (!detail.empty()) std::cout << " (" << detail << ")";
        std::cout << "\n";
        if (!ok) ++failures;
    };

    {
        // exhaustive small integer couples: the sign split must match
        // negative hyperbolicity of the products
        int checked = 0;
        bool all = true;
        for (int a = -3; a <= 3 && all; ++a)
            for (int b = -3; b <= 3 && all; ++b)
                for (int c = -3; c <= 3 && all; ++c)
                    for (int d = -3; d <= 3 && all; ++d) {
                        if (a * d - b * c != 1) continue;
                        if (std::abs(2 * (a * d + b * c)) == 2) continue; // degenerate product
                        const auto [differ, neg] = signs_differ_iff_negative(
                            couple_from_A({double(a), double(b), double(c), double(d)}));
                        all = differ == neg;
                        ++checked;
                    }
        check("sign split equals negative hyperbolicity", all,
              std::to_string(checked) + " integer couples");
    }
    {
        // random symmetric couples never produce a negative hyperbolic product
        std::mt19937 rng(12345);
        std::uniform_real_distribution<double> u(-3.0, 3.0);
        bool all = true;
        for (int i = 0; i < 2000 && all; ++i) {
            const double a = u(rng);
            double b = u(rng);
            if (std::fabs(b) < 1e-3) b = 1e-3;
            const RealSL2 A{a, b, (a * a - 1.0) / b, a};
            const auto [ab, ba] = couple_products(couple_from_A(A));
            all = classify(ab) != OrbitClass::NegativeHyperbolic &&
                  classify(ba) != OrbitClass::NegativeHyperbolic;
        }
        check("symmetric couples never negative hyperbolic", all, "2000 samples");
    }

    ShootResult hill_orbit;
    bool have_orbit = false;
    {
        std::string detail;
        bool ok = true;
        try {
            const SystemDef s = system_by_name("hill");
            hill_orbit = shoot_doubly_symmetric(s, -2.5, 0.05, 0.6, -1);
            have_orbit = true;
            ok = hill_orbit.orbit.closure_residual <= 1e-9 &&
                 hill_orbit.orbit.certificate.sym_residual <= 1e-7 &&
                 hill_orbit.orbit.certificate.dsym_residual <= 1e-7;
            detail = "closure " + fmt_g6(hill_orbit.orbit.closure_residual);
        } catch (const std::exception& e) {
            ok = false;
            detail = e.what();
        }
        check("hill retrograde orbit certificates", ok, detail);
    }
    {
        std::string detail;
        bool ok = have_orbit;
        if (have_orbit) {
            try {
                const SystemDef s = system_by_name("hill");
                const MonodromyReport r = symmetric_orbit_report(s, hill_orbit.orbit);
                ok = r.doubly_symmetric && r.b_sign_0 && r.b_sign_half &&
                     *r.b_sign_0 == *r.b_sign_half && r.trace >= -2.0 &&
                     r.classification != OrbitClass::NegativeHyperbolic &&
                     std::max(r.residuals.coninv_0, r.residuals.coninv_half) <= 1e-6 &&
                     std::max(r.residuals.slr_0, r.residuals.slr_half) <= 1e-6;
                detail = "trace " + fmt_g6(r.trace) + ", " +
                         std::string(to_string(r.classification));
                ok = ok && r.residuals.energy_drift <= 1e-10 && r.residuals.symplectic <= 1e-8 &&
                     r.residuals.field_fix <= 1e-7;
            } catch (const std::exception& e) {
                ok = false;
                detail = e.what();
            }
        }
        check("monodromy report invariants and hygiene", ok, detail);
    }
    {
        std::mt19937 rng(7);
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        std::vector<LCPoint> pts;
        while (pts.size() < 1000) {
            const std::complex<double> z{u(rng), u(rng)};
            if (std::abs(z) < 0.1) continue;
            pts.push_back({z, {u(rng), u(rng)}});
        }
        const double worst = lc_involution_check(pts);
        check("levi-civita intertwining", worst <= 1e-13, "residual " + fmt_g6(worst));
    }
    {
        std::string detail;
        bool ok = have_orbit;
        if (have_orbit) {
            try {
                const LiftReport lift = lc_lift_orbit(hill_orbit.orbit);
                ok = lift.winding % 2 != 0 && lift.sigma1_residual <= 1e-8 &&
                     lift.sigma2_residual <= 1e-8 && lift.closure_residual <= 1e-9;
                detail = "winding " + std::to_string(lift.winding);
            } catch (const std::exception& e) {
                ok = false;
                detail = e.what();
            }
        }
        check("levi-civita lift of the hill orbit", ok, detail);
    }

    if (failures) {
        std::cout << failures << " check(s) failed\n";
        return 2;
    }
    std::cout << "all checks passed\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"symmetric periodic orbits: shooting, monodromy, B-signs, Levi-Civita lifts"};
    app.require_subcommand(1);

    const auto lastwins = [](CLI::Option* o) {
        o->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
        return o;
    };
    const auto add_config = [&](CLI::App* sub, std::string& slot) {
        lastwins(sub->add_option("--config", slot,
                                 "JSON config file; explicit flags override its keys"));
    };

    int rc = 0;

    // classify
    auto* classify_cmd = app.add_subcommand("classify", "classify a 2x2 unit-determinant matrix");
    std::vector<double> matrix;
    std::string classify_cfg;
    lastwins(classify_cmd->add_option("--matrix", matrix, "entries a,b,c,d (row major)")
                 ->expected(4)
                 ->delimiter(',')
                 ->required());
    add_config(classify_cmd, classify_cfg);
    classify_cmd->callback([&] { rc = run_classify(matrix); });

    // shoot
    auto* shoot_cmd = app.add_subcommand("shoot", "find a doubly symmetric orbit at one energy");
    std::string shoot_sys, shoot_branch = "direct", shoot_cfg;
    std::string out_orbit = "orbit.json", out_report = "report.json", out_svg;
    double shoot_energy = 0;
    std::vector<double> shoot_bracket;
    int occurrence = 1, grid = 33;
    lastwins(shoot_cmd->add_option("--system", shoot_sys, "system name (hill, langmuir)")
                 ->required());
    lastwins(shoot_cmd->add_option("--energy", shoot_energy, "energy level")->required());
    lastwins(shoot_cmd->add_option("--bracket", shoot_bracket, "search bracket lo,hi")
                 ->expected(2)
                 ->delimiter(',')
                 ->required());
    lastwins(shoot_cmd->add_option("--branch", shoot_branch, "retro or direct")
                 ->check(CLI::IsMember({"retro", "direct"})));
    lastwins(shoot_cmd->add_option("--occurrence", occurrence, "which section crossing to use")
                 ->check(CLI::PositiveNumber));
    lastwins(shoot_cmd->add_option("--grid", grid, "bracket scan resolution")
                 ->check(CLI::Range(8, 100000)));
    lastwins(shoot_cmd->add_option("--out-orbit", out_orbit, "orbit JSON path"));
    lastwins(shoot_cmd->add_option("--out-report", out_report, "report JSON path"));
    lastwins(shoot_cmd->add_option("--svg", out_svg, "also write an SVG of the orbit"));
    add_config(shoot_cmd, shoot_cfg);
    shoot_cmd->callback([&] {
        rc = run_shoot(shoot_sys, shoot_energy, shoot_bracket, branch_from_name(shoot_branch),
                       occurrence, grid, out_orbit, out_report, out_svg);
    });

    // family
    auto* family_cmd = app.add_subcommand("family", "continue a family across an energy range");
    std::string fam_sys, fam_branch = "direct", fam_cfg;
    std::string fam_csv = "family.csv", fam_report = "family_report.json";
    std::vector<double> fam_range, fam_bracket;
    double fam_step = 0;
    lastwins(family_cmd->add_option("--system", fam_sys, "system name")->required());
    lastwins(family_cmd->add_option("--range", fam_range, "energy range lo,hi")
                 ->expected(2)
                 ->delimiter(',')
                 ->required());
    lastwins(family_cmd->add_option("--step", fam_step, "energy step")->required());
    lastwins(family_cmd->add_option("--bracket", fam_bracket, "fallback bracket lo,hi")
                 ->expected(2)
                 ->delimiter(',')
                 ->required());
    lastwins(family_cmd->add_option("--branch", fam_branch, "retro or direct")
                 ->check(CLI::IsMember({"retro", "direct"})));
    lastwins(family_cmd->add_option("--out-csv", fam_csv, "family CSV path"));
    lastwins(family_cmd->add_option("--out-report", fam_report, "family report JSON path"));
    add_config(family_cmd, fam_cfg);
    family_cmd->callback([&] {
        rc = run_family(fam_sys, fam_range, fam_step, fam_bracket, branch_from_name(fam_branch),
                        fam_csv, fam_report);
    });

    // monodromy
    auto* mono_cmd = app.add_subcommand("monodromy", "re-analyze a stored orbit");
    std::string mono_orbit, mono_out = "report.json", mono_cfg;
    lastwins(mono_cmd->add_option("--orbit", mono_orbit, "orbit JSON file")->required());
    lastwins(mono_cmd->add_option("--out-report", mono_out, "report JSON path"));
    add_config(mono_cmd, mono_cfg);
    mono_cmd->callback([&] { rc = run_monodromy(mono_orbit, mono_out); });

    // euler
    auto* euler_cmd = app.add_subcommand("euler", "chi_SFT of a list of report files");
    std::vector<std::string> euler_reports;
    std::vector<int> euler_covers;
    std::string euler_cfg;
    euler_cmd->add_option("--reports", euler_reports, "report JSON files")
        ->delimiter(',')
        ->required();
    lastwins(euler_cmd->add_option("--covers", euler_covers, "cover multiplicities, one per report")
                 ->delimiter(','));
    add_config(euler_cmd, euler_cfg);
    euler_cmd->callback([&] { rc = run_euler(euler_reports, euler_covers); });

    // lc-lift
    auto* lift_cmd = app.add_subcommand("lc-lift", "lift an orbit through the Levi-Civita cover");
    std::string lift_orbit, lift_csv = "lifted.csv", lift_report = "lift_report.json", lift_cfg;
    int lift_branch = 1;
    lastwins(lift_cmd->add_option("--orbit", lift_orbit, "orbit JSON file")->required());
    lastwins(lift_cmd->add_option("--branch", lift_branch, "square-root sheet, 1 or -1"));
    lastwins(lift_cmd->add_option("--out-csv", lift_csv, "lifted curve CSV path"));
    lastwins(lift_cmd->add_option("--out-report", lift_report, "lift report JSON path"));
    add_config(lift_cmd, lift_cfg);
    lift_cmd->callback([&] { rc = run_lc_lift(lift_orbit, lift_branch, lift_csv, lift_report); });

    // selfcheck
    auto* self_cmd = app.add_subcommand("selfcheck", "run the built-in invariant suite");
    std::string self_cfg;
    add_config(self_cmd, self_cfg);
    self_cmd->callback([&] { rc = run_selfcheck(); });

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = inject_config(std::move(args));
        std::reverse(args.begin(), args.end());
        app.parse(std::move(args));
        return rc;
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    } catch (const CliUsage& u) {
        std::cerr << "error: " << u.msg << "\n";
        return 1;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const NoSignChange& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const EventNotFound& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const EvenWinding& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    } catch (const ContinuationStalled& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
