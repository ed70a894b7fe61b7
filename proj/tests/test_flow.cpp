#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "orbitk/flow.hpp"

using namespace orbitk;

namespace {

State4 hill_probe_start() {
    return state_on_fixed_set(hill_system(), 0, 0.2, -2.5, -1);
}

} // namespace

TEST_CASE("zero-time integration returns a single sample") {
    const auto s = hill_system();
    const Trajectory tr = integrate(s, hill_probe_start(), 0.0);
    REQUIRE(tr.t.size() == 1);
    CHECK(tr.t[0] == 0.0);
    CHECK(dist_inf(tr.states[0], hill_probe_start()) == 0.0);
}

TEST_CASE("energy is conserved to the requested drift bound") {
    const auto s = hill_system();
    const Trajectory tr = integrate(s, hill_probe_start(), 3.0);
    CHECK(tr.stats.max_energy_drift <= 1e-10);
    CHECK(tr.t.size() > 10);
    CHECK(tr.t.back() == 3.0);

    const auto lang = langmuir_system();
    const State4 x0 = state_on_fixed_set(lang, 0, 1.0, -3.0, +1);
    const Trajectory tl = integrate(lang, x0, 2.0);
    CHECK(tl.stats.max_energy_drift <= 1e-10);
}

TEST_CASE("flow composition") {
    const auto s = hill_system();
    const State4 x0 = hill_probe_start();
    const State4 one_shot = integrate(s, x0, 1.7).end_state();
    const State4 mid = integrate(s, x0, 0.9).end_state();
    const State4 two_shot = integrate(s, mid, 0.8).end_state();
    CHECK(dist_inf(one_shot, two_shot) <= 1e-9 * std::max(1.0, norm_inf(one_shot)));
}

TEST_CASE("backward integration inverts the flow") {
    const auto s = hill_system();
    const State4 x0 = hill_probe_start();
    const State4 fwd = integrate(s, x0, 1.3).end_state();
    const State4 back = integrate(s, fwd, -1.3).end_state();
    CHECK(dist_inf(back, x0) <= 1e-9 * std::max(1.0, norm_inf(x0)));
}

TEST_CASE("reflection conjugates the flow to its time reverse") {
    for (const auto& s : {hill_system(), langmuir_system()}) {
        const State4 x0 = s.name == "hill" ? State4{0.25, 0.1, -0.3, -1.9}
                                           : State4{0.2, 0.9, 0.4, -0.1};
        for (const auto& inv : s.involutions) {
            const double t = 0.8;
            const State4 lhs = inv.apply(integrate(s, inv.apply(x0), t).end_state());
            const State4 rhs = integrate(s, x0, -t).end_state();
            CHECK(dist_inf(lhs, rhs) <= 1e-8 * std::max(1.0, norm_inf(rhs)));
        }
    }
}

TEST_CASE("states_at_times checkpoints agree with direct flows") {
    const auto s = hill_system();
    const State4 x0 = hill_probe_start();
    const std::vector<double> times{0.0, 0.4, 0.4, 1.1, 2.0};
    const auto xs = states_at_times(s, x0, times);
    REQUIRE(xs.size() == times.size());
    CHECK(dist_inf(xs[0], x0) == 0.0);
    CHECK(dist_inf(xs[1], xs[2]) == 0.0);
    for (std::size_t i = 1; i < times.size(); ++i) {
        const State4 direct = integrate(s, x0, times[i]).end_state();
        CHECK(dist_inf(xs[i], direct) <= 1e-10 * std::max(1.0, norm_inf(direct)));
    }
}

TEST_CASE("variational frames") {
    const auto s = hill_system();
    const State4 x0 = hill_probe_start();

    SECTION("identity at time zero and small-time linearization") {
        const Trajectory tr = integrate_variational(s, x0, 1e-4);
        const Mat4 id = identity4();
        for (int i = 0; i < 16; ++i) CHECK(tr.frames.front()[i] == id[i]);
        const Mat4 a = s.vector_field_jacobian(x0);
        const Mat4& d = tr.end_frame();
        // remainder of the exponential series is bounded by t^2 ||A||^2 here
        const double slack = 1e-8 * norm_inf(a) * norm_inf(a);
        for (int i = 0; i < 16; ++i)
            CHECK(std::fabs(d[i] - (id[i] + 1e-4 * a[i])) <= slack);
    }

    SECTION("columns match finite differences of the flow map") {
        const double t = 1.2, eps = 1e-6;
        const Mat4 d = integrate_variational(s, x0, t).end_frame();
        for (int j = 0; j < 4; ++j) {
            Vec4 hi = x0.vec(), lo = x0.vec();
            hi[j] += eps;
            lo[j] -= eps;
            const Vec4 fd = scale(sub(integrate(s, State4::from(hi), t).end_state().vec(),
                                      integrate(s, State4::from(lo), t).end_state().vec()),
                                  0.5 / eps);
            const Vec4 col = column(d, j);
            CHECK(norm_inf(sub(col, fd)) <= 1e-4 * std::max(1.0, norm_inf(col)));
        }
    }

    SECTION("frames stay symplectic with unit determinant") {
        const Trajectory tr = integrate_variational(s, x0, 3.0);
        CHECK(tr.stats.max_symplectic_residual <= 1e-8);
        CHECK(tr.stats.max_det_drift <= 1e-9);
        CHECK(tr.stats.max_energy_drift <= 1e-10);
    }
}

TEST_CASE("domain guard") {
    REQUIRE_THROWS_AS(integrate(hill_system(), {1e-12, 0, 0, 0}, 1.0), DomainExit);
    REQUIRE_THROWS_AS(integrate(langmuir_system(), {0.3, 1e-12, 0, 0}, 1.0), DomainExit);
}

TEST_CASE("section events") {
    const auto s = hill_system();
    const State4 x0 = hill_probe_start();

    SECTION("first vertical-axis crossing is located to machine precision") {
        EventSpec ev;
        ev.g = [](const State4& x) { return x.q1; };
        ev.direction = EventDirection::Decreasing;
        const EventHit hit = integrate_to_event(s, x0, ev, 10.0);
        CHECK(hit.t > 0);
        CHECK(std::fabs(hit.x.q1) <= 1e-11);
        CHECK(dist_inf(hit.trajectory.end_state(), hit.x) == 0.0);

        // oracle: bisection on honest flow states, no dense output involved
        double lo = 0, hi = hit.t + 0.1;
        const auto q1_at = [&](double t) { return integrate(s, x0, t).end_state().q1; };
        REQUIRE(q1_at(lo) > 0);
        REQUIRE(q1_at(hi) < 0);
        for (int i = 0; i < 60; ++i) {
            const double mid = 0.5 * (lo + hi);
            (q1_at(mid) > 0 ? lo : hi) = mid;
        }
        CHECK(std::fabs(hit.t - 0.5 * (lo + hi)) <= 1e-10);
    }

    SECTION("occurrence counting is strictly ordered") {
        EventSpec ev;
        ev.g = [](const State4& x) { return x.q1; };
        const EventHit first = integrate_to_event(s, x0, ev, 20.0);
        EventSpec ev2 = ev;
        ev2.occurrence = 2;
        const EventHit second = integrate_to_event(s, x0, ev2, 20.0);
        CHECK(second.t > first.t + 1e-6);
        CHECK(std::fabs(second.x.q1) <= 1e-11);
    }

    SECTION("direction filter") {
        EventSpec up;
        up.g = [](const State4& x) { return x.q1; };
        up.direction = EventDirection::Increasing;
        EventSpec down = up;
        down.direction = EventDirection::Decreasing;
        const EventHit h_up = integrate_to_event(s, x0, up, 20.0);
        const EventHit h_down = integrate_to_event(s, x0, down, 20.0);
        CHECK(h_down.t < h_up.t); // starts at q1 > 0 moving inward
    }

    SECTION("start exactly on the section does not count as a crossing") {
        EventSpec ev;
        ev.g = [](const State4& x) { return x.q2; }; // zero at the start state
        const EventHit hit = integrate_to_event(s, x0, ev, 20.0);
        CHECK(hit.t > 0.1);
        CHECK(std::fabs(hit.x.q2) <= 1e-11);
    }

    SECTION("identically vanishing event functions are rejected") {
        const double h0 = s.H(x0);
        EventSpec ev;
        ev.g = [&s, h0](const State4& x) { return s.H(x) - h0; };
        REQUIRE_THROWS_AS(integrate_to_event(s, x0, ev, 5.0), EventNotFound);
    }

    SECTION("missing events time out") {
        EventSpec ev;
        ev.g = [](const State4& x) { return x.q1 - 100.0; };
        REQUIRE_THROWS_AS(integrate_to_event(s, x0, ev, 3.0), EventNotFound);
    }

    SECTION("brake event of the atom") {
        const auto lang = langmuir_system();
        const State4 a0 = state_on_fixed_set(lang, 0, 1.0, -3.0, +1);
        EventSpec ev;
        ev.g = [](const State4& x) { return x.p1; };
        ev.direction = EventDirection::Decreasing;
        const EventHit hit = integrate_to_event(lang, a0, ev, 20.0);
        CHECK(hit.t > 0);
        CHECK(std::fabs(hit.x.p1) <= 1e-11);
    }
}

TEST_CASE("integration is deterministic") {
    const auto s = hill_system();
    const State4 x0 = hill_probe_start();
    const Trajectory a = integrate(s, x0, 2.0);
    const Trajectory b = integrate(s, x0, 2.0);
    REQUIRE(a.t.size() == b.t.size());
    CHECK(a.stats.rhs_evals == b.stats.rhs_evals);
    for (std::size_t i = 0; i < a.t.size(); ++i) {
        CHECK(a.t[i] == b.t[i]);
        CHECK(dist_inf(a.states[i], b.states[i]) == 0.0);
    }
}
