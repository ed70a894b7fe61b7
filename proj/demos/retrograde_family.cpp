// Sweep the retrograde orbit family of the lunar problem across an energy
// range and print one line per member. Build and run from anywhere; takes
// optional arguments: lo hi step.

#include <cstdio>
#include <cstdlib>

#include "orbitk/shooting.hpp"

using namespace orbitk;

int main(int argc, char** argv) {
    const double lo = argc > 1 ? std::atof(argv[1]) : -4.0;
    const double hi = argc > 2 ? std::atof(argv[2]) : -2.3;
    const double step = argc > 3 ? std::atof(argv[3]) : 0.1;

    const SystemDef hill = system_by_name("hill");
    FamilyOptions fo;
    fo.bracket_lo = 0.05;
    fo.bracket_hi = 0.6;
    fo.branch = -1;

    const ShootResult seed = shoot_doubly_symmetric(hill, lo, 0.05, 0.6, -1);
    const FamilyResult fam = continue_family(hill, seed, lo, hi, step, fo);

    std::printf("%10s %12s %12s %10s %6s %s\n", "energy", "q1_start", "period", "trace",
                "signs", "class");
    for (const FamilyMember& m : fam.members)
        std::printf("%10.4f %12.8f %12.8f %10.6f  %s/%s   %s\n", m.energy, m.shoot.coord,
                    m.shoot.orbit.period, m.report.trace,
                    m.report.b_sign_0 ? to_string(*m.report.b_sign_0) : "?",
                    m.report.b_sign_half ? to_string(*m.report.b_sign_half) : "?",
                    to_string(m.report.classification));

    for (const FamilyTransition& t : fam.transitions)
        std::printf("transition near e=%.6f: %s -> %s\n", t.energy, to_string(t.before),
                    to_string(t.after));
    if (fam.stalled) std::printf("stalled at e=%.4f: %s\n", fam.stalled_at, fam.stall_reason.c_str());
    return fam.stalled ? 1 : 0;
}
