#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "orbitk/shooting.hpp"

using namespace orbitk;
using Catch::Approx;

TEST_CASE("hill retrograde orbit at energy -2.5", "[shooting]") {
    const SystemDef s = hill_system();
    const ShootResult r = shoot_doubly_symmetric(s, -2.5, 0.05, 0.6, -1);

    // frozen from a converged run; the start coordinate agrees to 1e-11 with
    // the independent bisection solver in the monodromy tests
    CHECK(r.coord == Approx(0.171686581074980).margin(1e-9));
    CHECK(r.orbit.period == Approx(0.420213115868275).margin(1e-9));

    CHECK(std::fabs(r.residual) <= 1e-12);
    CHECK(r.t_section == Approx(0.25 * r.orbit.period).margin(1e-9));
    CHECK(r.orbit.closure_residual <= 1e-9);
    CHECK(r.orbit.energy == Approx(-2.5).margin(1e-12));
    CHECK(r.orbit.id == "hill-retro-e-2.500000");

    CHECK(r.orbit.certificate.doubly);
    CHECK(r.orbit.certificate.sym_inv == 0);
    CHECK(r.orbit.certificate.dsym_inv == 1);
    CHECK(r.orbit.certificate.sym_residual <= 1e-7);
    CHECK(r.orbit.certificate.dsym_residual <= 1e-8);

    // start state sits on Fix(rho1) at the converged coordinate
    CHECK(r.orbit.initial_state.q1 == Approx(r.coord));
    CHECK(r.orbit.initial_state.q2 == 0.0);
    CHECK(r.orbit.initial_state.p1 == 0.0);

    // samples cover one period in order and stay on the energy level
    REQUIRE(r.orbit.sample_t.size() == r.orbit.sample_x.size());
    REQUIRE(r.orbit.sample_t.size() >= 8);
    CHECK(r.orbit.sample_t.front() == 0.0);
    CHECK(r.orbit.sample_t.back() == Approx(r.orbit.period).margin(1e-12));
    for (std::size_t i = 1; i < r.orbit.sample_t.size(); ++i)
        CHECK(r.orbit.sample_t[i] > r.orbit.sample_t[i - 1]);
    for (std::size_t i = 0; i < r.orbit.sample_x.size(); i += 7)
        CHECK(s.H(r.orbit.sample_x[i]) == Approx(-2.5).margin(1e-9));
}

TEST_CASE("hill above the critical energy", "[shooting]") {
    // the critical value is about -2.16337; the retrograde orbit persists
    // beyond it, so the solver still converges (losing the bracket would be
    // an acceptable outcome as well, reported as NoSignChange)
    const SystemDef s = hill_system();
    const ShootResult r = shoot_doubly_symmetric(s, -2.0, 0.05, 0.6, -1);
    CHECK(r.orbit.closure_residual <= 1e-9);
    CHECK(r.orbit.certificate.doubly);
    CHECK(r.orbit.energy == Approx(-2.0).margin(1e-12));
}

TEST_CASE("degenerate and rootless brackets are NoSignChange", "[shooting]") {
    const SystemDef hill = hill_system();
    CHECK_THROWS_AS(shoot_doubly_symmetric(hill, -2.5, 0.3, 0.3, -1), NoSignChange);
    CHECK_THROWS_AS(shoot_symmetric(hill, 0, -2.5, 0.3, 0.3, -1), NoSignChange);
    // reversed bracket counts as empty
    CHECK_THROWS_AS(shoot_doubly_symmetric(hill, -2.5, 0.6, 0.05, -1), NoSignChange);

    // the langmuir root at energy -3 sits near 0.469, below this bracket
    const SystemDef lang = langmuir_system();
    CHECK_THROWS_AS(shoot_doubly_symmetric(lang, -3.0, 0.5, 2.0, 1), NoSignChange);
}

TEST_CASE("langmuir orbit from axis to brake point", "[shooting]") {
    const SystemDef s = langmuir_system();
    const ShootResult r = shoot_doubly_symmetric(s, -3.0, 0.1, 1.2, 1);

    // frozen from a converged run
    CHECK(r.coord == Approx(0.469020074582141).margin(1e-9));
    CHECK(r.orbit.period == Approx(0.817499994711132).margin(1e-9));
    CHECK(r.orbit.closure_residual <= 1e-9);
    CHECK(r.orbit.certificate.doubly);
    CHECK(r.orbit.id == "langmuir-direct-e-3.000000");

    // the quarter point is a brake point: both momenta vanish
    const State4 brake = flow_state(s, r.orbit.initial_state, 0.25 * r.orbit.period);
    CHECK(std::fabs(brake.p1) <= 1e-10);
    CHECK(std::fabs(brake.p2) <= 1e-10);
    CHECK(brake.q1 == Approx(0.521722222167524).margin(1e-9));
    CHECK(brake.q2 == Approx(0.111144557888706).margin(1e-9));
}

TEST_CASE("langmuir family obeys the Kepler-type scaling", "[shooting]") {
    // H = |p|^2 - 4/|q| + 1/(2 q2) is homogeneous under q -> s q,
    // p -> p/sqrt(s), E -> E/s, t -> s^(3/2) t, so orbits at different
    // energies are rescalings of one another. This pins the solved starts
    // and periods against each other with no frozen numbers involved.
    const SystemDef s = langmuir_system();
    const ShootResult r2 = shoot_doubly_symmetric(s, -2.0, 0.1, 1.2, 1);
    const ShootResult r4 = shoot_doubly_symmetric(s, -4.0, 0.1, 1.2, 1);

    CHECK(2.0 * r2.coord == Approx(4.0 * r4.coord).margin(1e-10));
    CHECK(r2.orbit.period ==
          Approx(r4.orbit.period * std::pow(2.0, 1.5)).epsilon(1e-9));
}

TEST_CASE("singly symmetric search finds the same hill orbit", "[shooting]") {
    const SystemDef s = hill_system();
    const ShootResult rd = shoot_doubly_symmetric(s, -2.5, 0.05, 0.6, -1);
    const ShootResult rs = shoot_symmetric(s, 0, -2.5, 0.05, 0.6, -1);

    CHECK(rs.coord == Approx(rd.coord).margin(1e-8));
    CHECK(rs.orbit.period == Approx(rd.orbit.period).margin(1e-8));
    CHECK(dist_inf(rs.orbit.initial_state, rd.orbit.initial_state) <= 1e-8);
    // the singly symmetric certificate claims less
    CHECK(rs.orbit.certificate.sym_inv == 0);
    CHECK_FALSE(rs.orbit.certificate.doubly);
    CHECK(rs.orbit.id == "hill-sym0-retro-e-2.500000");
    // the half return is half a period, twice the quarter section time
    CHECK(rs.t_section == Approx(2.0 * rd.t_section).margin(1e-9));
}

TEST_CASE("langmuir brake-to-brake search matches the quarter shift", "[shooting]") {
    const SystemDef s = langmuir_system();
    const ShootResult axis = shoot_doubly_symmetric(s, -3.0, 0.1, 1.2, 1);

    // start on Fix(rho2) = {p = 0}: coordinate is q1, the inner rest point
    // branch carries the orbit
    const ShootResult b2b = shoot_symmetric(s, 1, -3.0, 0.3, 1.0, -1);
    CHECK(b2b.orbit.period == Approx(axis.orbit.period).margin(1e-9));

    const Orbit shifted = quarter_shift(s, axis.orbit);
    CHECK(dist_inf(b2b.orbit.initial_state, shifted.initial_state) <= 1e-8);
    CHECK(shifted.period == Approx(axis.orbit.period).margin(1e-12));
    // roles swap: the shifted orbit starts on Fix(rho2)
    CHECK(shifted.certificate.sym_inv == 1);
    CHECK(shifted.certificate.dsym_inv == 0);
    CHECK(shifted.certificate.doubly);
}

TEST_CASE("quarter shift four times returns the original orbit", "[shooting]") {
    const SystemDef s = hill_system();
    const ShootResult r = shoot_doubly_symmetric(s, -2.5, 0.05, 0.6, -1);

    Orbit o = r.orbit;
    for (int k = 0; k < 4; ++k) o = quarter_shift(s, o);
    CHECK(dist_inf(o.initial_state, r.orbit.initial_state) <= 1e-9);
    CHECK(o.period == Approx(r.orbit.period).margin(1e-12));
    CHECK(o.certificate.sym_inv == 0);
    CHECK(o.certificate.dsym_inv == 1);
}

TEST_CASE("quarter shift rejects orbits without the double certificate", "[shooting]") {
    const SystemDef s = hill_system();
    const ShootResult rs = shoot_symmetric(s, 0, -2.5, 0.05, 0.6, -1);
    CHECK_FALSE(rs.orbit.certificate.doubly);
    CHECK_THROWS_AS(quarter_shift(s, rs.orbit), SymmetryViolated);
}

TEST_CASE("assembly gates reject a wrong quarter time", "[shooting]") {
    const SystemDef s = hill_system();
    const ShootResult r = shoot_doubly_symmetric(s, -2.5, 0.05, 0.6, -1);
    const ShootOptions o;
    // a quarter arc that misses the section cannot close
    CHECK_THROWS_AS(assemble_doubly_symmetric(s, r.orbit.initial_state, 1.1 * r.t_section, 0,
                                              1, o, "broken"),
                    Error);
    CHECK_THROWS_AS(
        assemble_doubly_symmetric(s, r.orbit.initial_state, 0.0, 0, 1, o, "broken"), Error);
}

TEST_CASE("solver is deterministic", "[shooting]") {
    const SystemDef s = hill_system();
    const ShootResult a = shoot_doubly_symmetric(s, -2.5, 0.05, 0.6, -1);
    const ShootResult b = shoot_doubly_symmetric(s, -2.5, 0.05, 0.6, -1);
    CHECK(a.coord == b.coord);
    CHECK(a.orbit.period == b.orbit.period);
    CHECK(a.residual == b.residual);
    CHECK(a.scan_evals == b.scan_evals);
    CHECK(a.bisect_iters == b.bisect_iters);
    CHECK(a.secant_iters == b.secant_iters);
    CHECK(dist_inf(a.orbit.initial_state, b.orbit.initial_state) == 0.0);
}

TEST_CASE("hill family across [-4.0, -2.3]", "[shooting][family]") {
    const SystemDef s = hill_system();
    FamilyOptions fo;
    fo.bracket_lo = 0.05;
    fo.bracket_hi = 0.6;
    fo.branch = -1;
    const ShootResult seed = shoot_doubly_symmetric(s, -4.0, 0.05, 0.6, -1);
    const FamilyResult fam = continue_family(s, seed, -4.0, -2.3, 0.05, fo);

    REQUIRE(fam.members.size() == 35);
    CHECK_FALSE(fam.stalled);
    CHECK(fam.violations.empty());
    CHECK(fam.transitions.empty());

    for (std::size_t i = 0; i < fam.members.size(); ++i) {
        const FamilyMember& m = fam.members[i];
        CHECK(m.energy == Approx(-4.0 + 0.05 * i).margin(1e-12));
        CHECK(m.shoot.orbit.closure_residual <= 1e-9);
        CHECK(m.report.doubly_symmetric);
        CHECK(m.report.classification == OrbitClass::Elliptic);
        CHECK(m.report.trace > -2.0);
        CHECK(m.report.trace < 2.0);
        REQUIRE(m.report.b_sign_0.has_value());
        REQUIRE(m.report.b_sign_half.has_value());
        CHECK(*m.report.b_sign_0 == *m.report.b_sign_half);
    }

    // frozen endpoints; the trace climbs toward +2 as the energy decreases
    CHECK(fam.members.front().report.trace == Approx(1.941772296405).margin(1e-6));
    CHECK(fam.members.back().report.trace == Approx(1.779439351455).margin(1e-6));
    CHECK(fam.members.front().shoot.coord == Approx(0.115237032237851).margin(1e-9));
    CHECK(fam.members.back().shoot.coord == Approx(0.183435029663522).margin(1e-9));
    CHECK(fam.members.front().report.trace > fam.members.back().report.trace);
}

TEST_CASE("family edge cases: empty range and oversized step", "[shooting][family]") {
    const SystemDef s = hill_system();
    FamilyOptions fo;
    fo.bracket_lo = 0.05;
    fo.bracket_hi = 0.6;
    fo.branch = -1;
    const ShootResult seed = shoot_doubly_symmetric(s, -2.5, 0.05, 0.6, -1);

    const FamilyResult empty = continue_family(s, seed, -2.5, -2.5, 0.05, fo);
    REQUIRE(empty.members.size() == 1);
    CHECK(empty.members.front().energy == Approx(-2.5).margin(1e-12));

    const FamilyResult wide = continue_family(s, seed, -2.5, -2.4, 0.5, fo);
    REQUIRE(wide.members.size() == 1);
    CHECK(wide.members.front().energy == Approx(-2.5).margin(1e-12));

    CHECK_THROWS_AS(continue_family(s, seed, -2.5, -2.4, 0.0, fo), Error);
    CHECK_THROWS_AS(continue_family(s, seed, -2.5, -2.4, -0.1, fo), Error);
}

TEST_CASE("family stalls when the root walks out of the bracket", "[shooting][family]") {
    // the start coordinate of the retrograde orbit grows with energy
    // (0.1717 at -2.5, 0.2042 at -2.0); capping the bracket at 0.184 makes
    // members beyond -2.3 unsolvable, so the march must stall and keep the
    // part it solved
    const SystemDef s = hill_system();
    FamilyOptions fo;
    fo.bracket_lo = 0.05;
    fo.bracket_hi = 0.184;
    fo.branch = -1;
    fo.max_substeps = 2;
    fo.shoot.grid = 9;
    const ShootOptions tight = fo.shoot;
    const ShootResult seed = shoot_doubly_symmetric(s, -2.5, 0.05, 0.184, -1, tight);

    const FamilyResult fam = continue_family(s, seed, -2.5, -2.0, 0.1, fo);
    CHECK(fam.stalled);
    CHECK(fam.members.size() >= 2);
    CHECK_FALSE(fam.stall_reason.empty());
    CHECK(fam.stalled_at >= -2.3);
    for (const FamilyMember& m : fam.members) {
        CHECK(m.energy <= -2.3 + 1e-12);
        CHECK(m.shoot.coord <= 0.184);
    }
}

TEST_CASE("a family with no solvable member is an error", "[shooting][family]") {
    // same capped bracket, but the whole requested range lies beyond it:
    // there are no partial results to return
    const SystemDef s = hill_system();
    FamilyOptions fo;
    fo.bracket_lo = 0.05;
    fo.bracket_hi = 0.184;
    fo.branch = -1;
    fo.max_substeps = 2;
    fo.shoot.grid = 9;
    const ShootResult seed =
        shoot_doubly_symmetric(s, -2.5, 0.05, 0.184, -1, fo.shoot);
    CHECK_THROWS_AS(continue_family(s, seed, -2.0, -1.9, 0.05, fo), ContinuationStalled);
}
