#pragma once

#include <string>
#include <vector>

#include "orbitk/state.hpp"

namespace orbitk {

/// How an orbit closes up under the reflection symmetries, with the
/// measured residuals that back the claim.
struct SymmetryCertificate {
    int sym_inv = -1;          // index of the reflecting involution
    double sym_residual = 0;   // max over sampled times of |rho(v(T-t)) - v(t)|
    bool doubly = false;
    int dsym_inv = -1;         // second involution (maps v(0) to v(T/2))
    double dsym_residual = 0;  // |rho2(v(0)) - v(T/2)|
};

/// A periodic orbit found by shooting: the initial state sits on the fixed
/// set of its primary involution. Samples cover one full period.
struct Orbit {
    std::string system;
    std::string id;
    State4 initial_state;
    double period = 0;
    double energy = 0;
    double closure_residual = 0; // honest full-period integration gap
    SymmetryCertificate certificate;
    std::vector<double> sample_t;
    std::vector<State4> sample_x;
};

} // namespace orbitk
