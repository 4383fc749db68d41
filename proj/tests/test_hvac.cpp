#include "fixtures.hpp"

#include "pdflow/hvac.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace pdflow;
using namespace pdflow::hvac;
using namespace fixtures;
using Catch::Approx;

namespace {

// Interior optimum of the welfare QP when every zone shares a, gamma = 1 and
// T_ref, with rho = (rho1, 0, 0): T_i = T_ref - a lambda / 2, lambda = 2 rho1 q.
struct Interior {
    double T;
    double q;
    double lambda;
};

Interior interior_optimum(double a, double b, double T_ref, double rho1, int N) {
    const double q = (a * N * T_ref + b) / (1.0 + N * a * a * rho1);
    const double lambda = 2.0 * rho1 * q;
    return {T_ref - a * lambda / 2.0, q, lambda};
}

HvacState state_at(const ComposedSystem& sys, const KktPoint& k) {
    return HvacState::from_full(make_state(sys, 0.0, k.x_star, k.lambda_star, k.mu_star));
}

}  // namespace

TEST_CASE("steady-state constraint", "[hvac]") {
    SECTION("single zone") {
        auto net = ThermalNetwork::reference(1);
        const auto ss = steady_state_constraint(net);
        CHECK(ss.A(0, 0) == Approx(-3.0 / 11.5));
        CHECK(ss.A(0, 0) == Approx(-0.26087).epsilon(1e-5));
        CHECK(ss.b == Approx(3.0 * (30.0 / 11.5 + 0.5)));
        CHECK(ss.b == Approx(9.32609).epsilon(1e-5));
    }
    SECTION("inter-zone resistances cancel") {
        auto net = ThermalNetwork::reference(2);
        const auto base = steady_state_constraint(net);
        for (double r : {0.0, 1.0, 7.5, 1e4}) {
            net.R_zone(0, 1) = net.R_zone(1, 0) = r;
            const auto ss = steady_state_constraint(net);
            CHECK(ss.A == base.A);
            CHECK(ss.b == base.b);
        }
    }
    SECTION("zero conversion factor") {
        auto net = ThermalNetwork::reference(3);
        net.theta = 0.0;
        const auto ss = steady_state_constraint(net);
        CHECK(ss.A.isZero(0.0));
        CHECK(ss.b == 0.0);
        CHECK_THROWS_AS(build_welfare_problem(net, WelfareParams::reference(3)), ContractViolation);
    }
    SECTION("matches the zone-by-zone heat balance") {
        auto net = ThermalNetwork::reference(4);
        net.R_zone(0, 2) = net.R_zone(2, 0) = 13.0;
        net.d = vec({0.5, 0.9, 0.1, 0.3});
        const auto ss = steady_state_constraint(net);
        const Vector T = vec({19.0, 22.5, 20.0, 23.5});
        double total = 0.0;
        for (int i = 0; i < 4; ++i) {
            double heat = (net.T_inf - T(i)) / net.R_amb(i) + net.d(i);
            for (int j = 0; j < 4; ++j) {
                if (net.R_zone(i, j) > 0.0) {
                    heat += (T(j) - T(i)) / net.R_zone(i, j);
                }
            }
            total += net.theta * heat;
        }
        CHECK((ss.A * T)(0) + ss.b == Approx(total));
    }
}

TEST_CASE("welfare problem", "[hvac]") {
    const auto net = ThermalNetwork::reference(4);
    const auto params = WelfareParams::reference(4);
    const auto prob = build_welfare_problem(net, params);
    SECTION("Hessian and supply cost") {
        const Matrix H = prob.objective_hessian(Vector::Zero(5));
        CHECK(H.isDiagonal());
        CHECK(H.diagonal() == vec({2.0, 2.0, 2.0, 2.0, 1.0}));
        // U(q) = 0.5 q^2 at T = T_ref, after the utility offsets.
        Vector x = Vector::Constant(5, 20.5);
        x(4) = 3.0;
        CHECK(prob.objective(x) == Approx(0.5 * 9.0 - 4 * 40.0));
    }
    SECTION("constraint layout") {
        CHECK(prob.m() == 1);
        CHECK(prob.p() == 8);
        Vector x = vec({17.0, 20.0, 20.0, 25.0, 0.0});
        const Vector g = prob.inequality(x);
        CHECK(g(0) == Approx(1.0));
        CHECK(g(7) == Approx(1.0));
        CHECK(g(4) == Approx(-7.0));
    }
    SECTION("reference building optimum") {
        const auto kkt = active_set_oracle(prob);
        const auto ref = interior_optimum(-3.0 / 11.5, 3.0 * (4 * 30.0 / 11.5 + 2.0), 20.5, 0.5, 4);
        for (int i = 0; i < 4; ++i) {
            CHECK(kkt.x_star(i) == Approx(ref.T).epsilon(1e-10));
        }
        CHECK(kkt.x_star(4) == Approx(ref.q).epsilon(1e-10));
        CHECK(kkt.lambda_star(0) == Approx(ref.lambda).epsilon(1e-10));
        CHECK(kkt.x_star(0) == Approx(22.327).margin(1e-3));
        CHECK(kkt.x_star(4) == Approx(14.0067).margin(1e-4));
        CHECK(kkt.mu_star.isZero(0.0));
    }
    SECTION("single zone without bounds") {
        auto p1 = WelfareParams::reference(1);
        p1.T_min(0) = -1e6;
        p1.T_max(0) = 1e6;
        const auto kkt = active_set_oracle(build_welfare_problem(ThermalNetwork::reference(1), p1));
        const auto ref = interior_optimum(-3.0 / 11.5, 3.0 * (30.0 / 11.5 + 0.5), 20.5, 0.5, 1);
        CHECK(kkt.x_star(0) == Approx(ref.T));
        CHECK(kkt.x_star(1) == Approx(ref.q));
    }
    SECTION("a tripled price pushes zones onto the upper bound") {
        const auto kkt = active_set_oracle(build_welfare_problem(net, params, 3.0));
        const double a = -3.0 / 11.5;
        const double b = 3.0 * (4 * 30.0 / 11.5 + 2.0);
        for (int i = 0; i < 4; ++i) {
            CHECK(kkt.x_star(i) == Approx(24.0));
        }
        CHECK(kkt.x_star(4) == Approx(4 * a * 24.0 + b));
        CHECK(kkt.x_star(4) < active_set_oracle(prob).x_star(4));
    }
}

TEST_CASE("hvac vector field", "[hvac]") {
    const auto net = ThermalNetwork::reference(4);
    const auto params = WelfareParams::reference(4);
    auto prob = std::make_shared<const ConvexProblem>(build_welfare_problem(net, params));
    Dynamics dyn = Dynamics::unit(4);
    dyn.tau_T = vec({1.0, 2.0, 0.5, 1.5});
    dyn.tau_q = 0.8;
    dyn.tau_lambda = 1.2;
    dyn.tau_mu_low = vec({1.0, 0.7, 1.3, 2.0});
    dyn.tau_mu_high = vec({0.9, 1.1, 1.0, 0.6});
    const auto sys = make_system(prob, dyn);
    const auto ss = steady_state_constraint(net);

    SECTION("at the optimum every rate vanishes") {
        const auto r = hvac_vector_field(state_at(sys, active_set_oracle(*prob)), sys);
        CHECK(max_norm(r.T_dot) < 1e-12);
        CHECK(std::abs(r.q_dot) < 1e-12);
        CHECK(std::abs(r.lambda_dot) < 1e-12);
        CHECK(max_norm(r.mu_low_dot) == 0.0);
        CHECK(max_norm(r.mu_high_dot) == 0.0);
    }
    SECTION("matches the zone-level equations on random states") {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> temp(16.0, 26.0);
        std::uniform_real_distribution<double> mult(0.0, 2.0);
        std::bernoulli_distribution zero(0.3);
        for (int trial = 0; trial < 50; ++trial) {
            HvacState s;
            s.T = Vector(4);
            s.mu_low = Vector(4);
            s.mu_high = Vector(4);
            for (int i = 0; i < 4; ++i) {
                s.T(i) = temp(rng);
                s.mu_low(i) = zero(rng) ? 0.0 : mult(rng);
                s.mu_high(i) = zero(rng) ? 0.0 : mult(rng);
            }
            s.q = mult(rng) * 10.0;
            s.lambda = mult(rng) * 10.0 - 5.0;
            const auto r = hvac_vector_field(s, sys);
            for (int i = 0; i < 4; ++i) {
                const double grad_u = -2.0 * params.gamma(i) * (s.T(i) - params.T_ref(i));
                const double expected = (grad_u - ss.A(0, i) * s.lambda + s.mu_low(i) - s.mu_high(i)) / dyn.tau_T(i);
                CHECK(std::abs(r.T_dot(i) - expected) <= 1e-12 * std::max(1.0, std::abs(expected)));
                const double gl = params.T_min(i) - s.T(i);
                const double gh = s.T(i) - params.T_max(i);
                CHECK(r.mu_low_dot(i) == Approx(positive_projection(gl, s.mu_low(i)) / dyn.tau_mu_low(i)));
                CHECK(r.mu_high_dot(i) == Approx(positive_projection(gh, s.mu_high(i)) / dyn.tau_mu_high(i)));
            }
            CHECK(r.q_dot == Approx((-2.0 * params.rho[0] * s.q + s.lambda) / dyn.tau_q));
            CHECK(r.lambda_dot == Approx(((ss.A * s.T)(0) + ss.b - s.q) / dyn.tau_lambda));
        }
    }
    SECTION("interior state with zero multipliers sees only the equality part") {
        HvacState s{Vector::Constant(4, 21.0), 5.0, 2.0, Vector::Zero(4), Vector::Zero(4)};
        const auto r = hvac_vector_field(s, sys);
        CHECK(max_norm(r.mu_low_dot) == 0.0);
        CHECK(max_norm(r.mu_high_dot) == 0.0);
        CHECK(r.T_dot(0) == Approx((-1.0 - ss.A(0, 0) * 2.0) / 1.0));
    }
    SECTION("marginal cost equal to the price holds q") {
        HvacState s{Vector::Constant(4, 21.0), 5.0, 5.0, Vector::Zero(4), Vector::Zero(4)};
        CHECK(hvac_vector_field(s, sys).q_dot == 0.0);
    }
}

TEST_CASE("internal loads", "[hvac]") {
    const Vector base = Vector::Constant(4, 0.5);
    CHECK(synth_internal_load(3.0, base, 0.4, 0.3) == base);
    const Vector noon = synth_internal_load(12.0, base, 0.4, 0.3);
    CHECK(noon(0) == Approx(0.5 + 0.4 + 0.3));
    for (double h : {7.0, 9.0, 11.0, 13.0, 15.0, 17.5}) {
        CHECK(synth_internal_load(h, base, 0.0, 0.3)(0) < noon(0) - 0.4);
    }
    CHECK(synth_internal_load(14.0, base, 0.0, 0.0) == base);
    CHECK_THROWS_AS(synth_internal_load(24.0, base, 0.0, 0.0), ContractViolation);
}

TEST_CASE("schedules", "[hvac]") {
    const TouSchedule s{{0.0, 7.0, 10.0, 24.0}, {1.0, 3.0, 1.0}};
    CHECK_NOTHROW(s.validate());
    CHECK(s.price_at(6.99) == 1.0);
    CHECK(s.price_at(7.0) == 3.0);
    CHECK(s.price_at(23.0) == 1.0);
    CHECK_THROWS_AS((TouSchedule{{0.0, 7.0, 20.0}, {1.0, 2.0}}.validate()), ContractViolation);
    CHECK_THROWS_AS((TouSchedule{{0.0, 12.0, 12.0, 24.0}, {1.0, 2.0, 1.0}}.validate()), ContractViolation);
    CHECK_THROWS_AS((TouSchedule{{0.0, 24.0}, {-1.0}}.validate()), ContractViolation);
}

TEST_CASE("time-of-use sweep", "[hvac]") {
    const auto net = ThermalNetwork::reference(4);
    const auto params = WelfareParams::reference(4);
    const auto dyn = Dynamics::unit(4);
    const HvacState init{Vector::Constant(4, 20.5), 0.0, 0.0, Vector::Zero(4), Vector::Zero(4)};
    const LoadProfile constant_loads{0.0, 0.0, 8.0};
    TouOptions opts;
    opts.keep_trajectories = false;

    SECTION("flat price gives identical optima") {
        const auto day = run_tou_scenario(net, params, TouSchedule{{0.0, 8.0, 16.0, 24.0}, {1.0, 1.0, 1.0}},
                                          constant_loads, dyn, init, opts);
        REQUIRE(day.segments.size() == 3);
        for (const auto& s : day.segments) {
            CHECK(std::abs(s.q - day.segments[0].oracle.x_star(4)) <= 1e-4);
            CHECK(s.oracle.x_star == day.segments[0].oracle.x_star);
        }
    }
    SECTION("a price surge sheds supply within the comfort band") {
        const auto day = run_tou_scenario(net, params, TouSchedule{{0.0, 8.0, 16.0, 24.0}, {1.0, 3.0, 1.0}},
                                          constant_loads, dyn, init, opts);
        REQUIRE(day.segments.size() == 3);
        const auto& surge = day.segments[1];
        CHECK(surge.q < day.segments[0].q);
        CHECK(surge.q < day.segments[2].q);
        for (const auto& s : day.segments) {
            CHECK(s.T.maxCoeff() <= 24.0 + 1e-4);
            CHECK(s.T.minCoeff() >= 18.0 - 1e-4);
            CHECK(s.cooling_load == Approx(s.q / 3.0));
        }
        CHECK((surge.T.array() - 20.5).abs().minCoeff() > (day.segments[0].T.array() - 20.5).abs().maxCoeff());
    }
    SECTION("gaps in the schedule are rejected") {
        CHECK_THROWS_AS(run_tou_scenario(net, params, TouSchedule{{0.0, 20.0}, {1.0}}, constant_loads, dyn, init, opts),
                        ContractViolation);
    }
    SECTION("an impossible settling cap reports the interval") {
        opts.max_time_constants = 0.5;
        try {
            (void)run_tou_scenario(net, params, TouSchedule::flat(), constant_loads, dyn, init, opts);
            FAIL("expected a scenario error");
        } catch (const ScenarioError& e) {
            CHECK(e.interval() == 0);
        }
    }
}
