#include "fixtures.hpp"

#include "pdflow/integrator.hpp"
#include "pdflow/monitor.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace pdflow;
using namespace fixtures;
using Catch::Approx;

namespace {

Trajectory run(const ComposedSystem& sys, const FullState& init, double horizon, double stride = 0.05) {
    IntegratorOptions o;
    o.horizon = horizon;
    o.record_stride = stride;
    return simulate(sys, init, o);
}

ComposedSystem oscillating_pair() {
    const auto prob = qp(Matrix::Identity(2, 2), Vector::Zero(2), Matrix::Identity(2, 2), vec({-1.0, -1.0}));
    TimeSignal u{[](double t) { return vec({0.5 + 0.7 * std::sin(t), 0.5 + 0.7 * std::sin(t - std::numbers::pi)}); },
                 [](double t) { return vec({0.7 * std::cos(t), 0.7 * std::cos(t - std::numbers::pi)}); }};
    return ComposedSystem::driven(ProjectionSystem(prob, vec({1.0, 1.0})), u);
}

ComposedSystem held_input(double u_star, double tau_mu) {
    const auto prob = qp(mat({{1.0}}), vec({0.0}), mat({{1.0}}), vec({-1.0}));
    return ComposedSystem::driven(ProjectionSystem(prob, vec({tau_mu})), TimeSignal::constant(vec({u_star})));
}

}  // namespace

TEST_CASE("unforced decrease", "[monitor]") {
    const auto sys = composed(eq_problem());
    const auto traj = run(sys, make_state(sys, 0.0, vec({0.0, 0.0}), vec({0.0}), Vector(0)), 20.0);
    SECTION("equality-only run passes") {
        const auto r = check_unforced_decrease(traj);
        CHECK(r.passed());
        CHECK(r.worst_violation <= 1e-8);
        CHECK(r.detail == "P_tilde");
    }
    SECTION("a corrupted sample is located") {
        auto bad = traj;
        bad.samples[40].storage.p_tilde += 1.0;
        const auto r = check_unforced_decrease(bad);
        CHECK(r.failed());
        REQUIRE(r.location.size() == 1);
        CHECK(r.location[0] == bad.samples[40].t);
    }
    SECTION("a run resting at equilibrium has zero violation") {
        const auto rest = run(sys, make_state(sys, 0.0, vec({1.0, 1.0}), vec({-2.0}), Vector(0)), 5.0);
        const auto r = check_unforced_decrease(rest);
        CHECK(r.passed());
        CHECK(r.worst_violation == 0.0);
    }
    SECTION("driven runs are not applicable") {
        const auto d = held_input(0.0, 1.0);
        CHECK(check_unforced_decrease(run(d, make_state(d, 0.0, vec({0.0}), Vector(0), vec({0.5})), 1.0)).outcome ==
              Outcome::not_applicable);
    }
}

TEST_CASE("switch ledger", "[monitor]") {
    SECTION("empty ledger passes vacuously") {
        const auto sys = composed(eq_problem());
        const auto traj = run(sys, make_state(sys, 0.0, vec({0.0, 0.0}), vec({0.0}), Vector(0)), 2.0);
        CHECK(check_switch_ledger(traj).passed());
    }
    SECTION("revisit pattern: deactivations keep, activations drop") {
        const auto sys = oscillating_pair();
        const auto traj = run(sys, make_state(sys, 0.0, Vector::Zero(2), Vector(0), Vector::Zero(2)), 19.0, 0.01);
        REQUIRE(traj.ledger.size() >= 4);
        CHECK(traj.ledger[0].kind == SwitchKind::deactivation);
        CHECK(traj.ledger[1].kind == SwitchKind::activation);
        CHECK(traj.ledger[2].kind == SwitchKind::deactivation);
        CHECK(traj.ledger[3].kind == SwitchKind::activation);
        CHECK(traj.ledger[1].storage_after < traj.ledger[1].storage_before);
        CHECK(traj.ledger[3].storage_after < traj.ledger[3].storage_before);
        CHECK(check_switch_ledger(traj).passed());
    }
    SECTION("a non-dropping activation fails") {
        const auto sys = oscillating_pair();
        auto traj = run(sys, make_state(sys, 0.0, Vector::Zero(2), Vector(0), Vector::Zero(2)), 5.0, 0.01);
        for (auto& ev : traj.ledger) {
            if (ev.kind == SwitchKind::activation) {
                ev.storage_after = ev.storage_before;
            }
        }
        CHECK(check_switch_ledger(traj).failed());
    }
}

TEST_CASE("hybrid passivity", "[monitor]") {
    SECTION("revisited modes satisfy the inequality") {
        const auto sys = oscillating_pair();
        const auto traj = run(sys, make_state(sys, 0.0, Vector::Zero(2), Vector(0), Vector::Zero(2)), 19.0, 0.01);
        const auto r = check_hybrid_passivity(traj, ActiveSet::full(2));
        CHECK(r.passed());
        CHECK(check_hybrid_passivity_all(traj).passed());
    }
    SECTION("modes visited once are not applicable") {
        const auto sys = composed(qp(mat({{2.0}}), vec({0.0}), mat({{0.0}}), vec({-1.0})));
        const auto traj = run(sys, make_state(sys, 0.0, vec({0.0}), Vector(0), vec({0.5})), 2.0);
        REQUIRE(traj.ledger.size() == 1);
        CHECK(check_hybrid_passivity(traj, ActiveSet(1)).outcome == Outcome::not_applicable);
        CHECK(check_hybrid_passivity_all(traj).outcome == Outcome::not_applicable);
    }
    SECTION("single mode reduces to a dissipation check") {
        const auto sys = composed(qp(mat({{2.0}}), vec({-1.0}), mat({{1.0}}), vec({-5.0})));
        const auto traj = run(sys, make_state(sys, 0.0, vec({0.0}), Vector(0), vec({3.0})), 0.3);
        REQUIRE(traj.ledger.empty());
        CHECK(check_hybrid_passivity(traj, traj.samples.front().state.sigma).passed());
    }
    SECTION("equality-only runs are not applicable") {
        const auto sys = composed(eq_problem());
        const auto traj = run(sys, make_state(sys, 0.0, vec({0.0, 0.0}), vec({0.0}), Vector(0)), 2.0);
        CHECK(check_hybrid_passivity_all(traj).outcome == Outcome::not_applicable);
    }
}

TEST_CASE("quadratic norm", "[monitor]") {
    SECTION("linear decay until activation") {
        const double tau = 2.0;
        const auto sys = held_input(0.0, tau);
        const auto traj = run(sys, make_state(sys, 0.0, vec({0.0}), Vector(0), vec({0.5})), 3.0);
        for (const auto& s : traj.samples) {
            const double v = 0.5 * tau * s.state.mu(0) * s.state.mu(0);
            const double expected = s.t < 0.5 * tau ? 0.5 * tau * std::pow(0.5 - s.t / tau, 2) : 0.0;
            CHECK(v == Approx(expected).margin(1e-10));
        }
        CHECK(check_quadratic_norm(traj, sys.proj(), vec({0.0})).passed());
    }
    SECTION("starting at the equilibrium") {
        const auto sys = held_input(0.0, 1.0);
        const auto traj = run(sys, make_state(sys, 0.0, vec({0.0}), Vector(0), vec({0.0})), 2.0);
        const auto r = check_quadratic_norm(traj, sys.proj(), vec({0.0}));
        CHECK(r.passed());
        CHECK(r.worst_violation == 0.0);
    }
    SECTION("boundary equilibrium keeps any multiplier") {
        const auto sys = held_input(1.0, 1.0);
        const auto traj = run(sys, make_state(sys, 0.0, vec({1.0}), Vector(0), vec({0.7})), 2.0);
        CHECK(traj.terminal().state.mu(0) == 0.7);
        CHECK(check_quadratic_norm(traj, sys.proj(), vec({0.7})).worst_violation == 0.0);
    }
    SECTION("mu_bar outside the equilibrium set") {
        const auto sys = held_input(0.0, 1.0);
        const auto traj = run(sys, make_state(sys, 0.0, vec({0.0}), Vector(0), vec({0.5})), 1.0);
        CHECK_THROWS_AS(check_quadratic_norm(traj, sys.proj(), vec({0.5})), PreconditionError);
    }
}

TEST_CASE("convergence", "[monitor]") {
    SECTION("scalar inequality") {
        const auto prob = scalar_problem(true);
        const auto sys = composed(prob);
        const auto traj = run(sys, make_state(sys, 0.0, vec({0.0}), Vector(0), vec({0.0})), 40.0);
        const auto c = check_convergence(traj, *prob, active_set_oracle(*prob));
        CHECK(c.report.passed());
        REQUIRE(c.settling_time);
        CHECK(*c.settling_time > 0.0);
    }
    SECTION("equality QP compares the multiplier too") {
        const auto prob = eq_problem();
        const auto sys = composed(prob);
        const auto traj = run(sys, make_state(sys, 0.0, vec({0.0, 0.0}), vec({0.0}), Vector(0)), 40.0);
        CHECK(check_convergence(traj, *prob, active_set_oracle(*prob)).report.passed());
    }
    SECTION("starting at the oracle settles immediately") {
        const auto prob = scalar_problem(true);
        const auto sys = composed(prob);
        const auto traj = run(sys, make_state(sys, 0.0, vec({1.0}), Vector(0), vec({2.0})), 1.0);
        const auto c = check_convergence(traj, *prob, active_set_oracle(*prob));
        CHECK(c.report.passed());
        REQUIRE(c.settling_time);
        CHECK(*c.settling_time == 0.0);
    }
    SECTION("too short a run is inconclusive") {
        const auto prob = scalar_problem(true);
        const auto sys = composed(prob);
        const auto traj = run(sys, make_state(sys, 0.0, vec({0.0}), Vector(0), vec({0.0})), 5.0);
        CHECK(check_convergence(traj, *prob, active_set_oracle(*prob)).report.outcome == Outcome::inconclusive);
    }
    SECTION("a wrong target fails") {
        const auto prob = scalar_problem(true);
        const auto sys = composed(prob);
        const auto traj = run(sys, make_state(sys, 0.0, vec({1.0}), Vector(0), vec({2.0})), 5.0);
        CHECK(check_convergence(traj, *prob, {vec({1.5}), Vector(0), vec({1.0})}).report.failed());
    }
}

TEST_CASE("report formatting", "[monitor]") {
    CertificateReport a{"alpha", Outcome::passed, 0.0, {1.0}, 1e-8, "ok"};
    CertificateReport b{"beta", Outcome::not_applicable, 0.0, {}, 0.0, "n/a"};
    CHECK_FALSE(any_failed({a, b}));
    b.outcome = Outcome::failed;
    CHECK(any_failed({a, b}));
    const auto j = to_json(std::vector<CertificateReport>{a, b});
    CHECK(j.size() == 2);
    CHECK(j[1]["outcome"] == "failed");
    CHECK(to_table({a, b}).find("alpha") != std::string::npos);
    CHECK(std::string(to_string(Outcome::inconclusive)) == "inconclusive");
}
