#include "fixtures.hpp"

#include <catch_amalgamated.hpp>

using namespace pdflow;
using namespace fixtures;
using Catch::Approx;

namespace {

FullState state_of(Vector x, Vector lambda, Vector mu, const ComposedSystem& sys) {
    const Vector g = sys.proj().constraints().inequality(x);
    ActiveSet sigma = compute_sigma(mu, g);
    return {std::move(x), std::move(lambda), std::move(mu), std::move(sigma)};
}

// f = (x1 - 1)^2 + exp(x2), g = |x|^2 - 1, plus h = x1 - x2 - 0.2.
std::shared_ptr<const ConvexProblem> curved_problem() {
    ScalarOracle f{[](const Vector& x) { return std::pow(x(0) - 1.0, 2) + std::exp(x(1)); },
                   [](const Vector& x) { return vec({2.0 * (x(0) - 1.0), std::exp(x(1))}); },
                   [](const Vector& x) { return mat({{2.0, 0.0}, {0.0, std::exp(x(1))}}); }};
    ScalarOracle g{[](const Vector& x) { return x.squaredNorm() - 1.0; }, [](const Vector& x) { return Vector(2.0 * x); },
                   [](const Vector&) { return Matrix(2.0 * Matrix::Identity(2, 2)); }};
    return std::make_shared<const ConvexProblem>(2, f, mat({{1.0, -1.0}}), vec({-0.2}), std::vector<ScalarOracle>{g});
}

}  // namespace

TEST_CASE("composed vector field", "[interconnect]") {
    const auto sys = composed(scalar_problem(true));
    SECTION("KKT point is an equilibrium") {
        const auto r = composed_vector_field(sys, state_of(vec({1.0}), Vector(0), vec({2.0}), sys), vec({0.0}));
        CHECK(r.x_dot(0) == 0.0);
        CHECK(r.mu_dot(0) == 0.0);
        CHECK(r.lambda_dot.size() == 0);
    }
    SECTION("projection holds a zero multiplier while feasible") {
        const auto r = composed_vector_field(sys, state_of(vec({0.0}), Vector(0), vec({0.0}), sys), vec({0.0}));
        CHECK(r.x_dot(0) == Approx(4.0));
        CHECK(r.mu_dot(0) == 0.0);
    }
    SECTION("zero multipliers reduce to the equality subsystem") {
        const auto prob = qp(mat({{2.0, 0.5}, {0.5, 1.0}}), vec({1.0, -2.0}), mat({{1.0, 0.0}}), vec({-10.0}));
        const auto csys = composed(prob, 0.7);
        const Vector x = vec({0.4, -0.3});
        const auto r = composed_vector_field(csys, state_of(x, Vector(0), vec({0.0}), csys), Vector::Zero(2));
        const auto b = bm_vector_field(csys.bm(), x, Vector(0), Vector::Zero(2));
        CHECK(r.x_dot == b.x_dot);
    }
    SECTION("the multiplier term enters with the gradient sign") {
        const auto r = composed_vector_field(sys, state_of(vec({1.0}), Vector(0), vec({3.0}), sys), vec({0.0}));
        CHECK(r.x_dot(0) == Approx(-1.0));
    }
}

TEST_CASE("composite storage", "[interconnect]") {
    const auto sys = composed(scalar_problem(true));
    SECTION("equilibrium") {
        const auto s = state_of(vec({1.0}), Vector(0), vec({2.0}), sys);
        CHECK(composite_storage(sys, s, composed_vector_field(sys, s, vec({0.0}))).s_tilde == 0.0);
    }
    SECTION("additive split") {
        const auto s = state_of(vec({0.0}), Vector(0), vec({0.5}), sys);
        const auto r = composed_vector_field(sys, s, vec({0.0}));
        const auto st = composite_storage(sys, s, r);
        CHECK(st.p_tilde == Approx(krasovskii_storage(sys.bm(), r.x_dot, r.lambda_dot)));
        CHECK(st.s_sigma == Approx(switched_storage(sys.proj(), s.sigma, r.mu_dot)));
        CHECK(st.s_tilde == Approx(st.p_tilde + st.s_sigma));
    }
    SECTION("full active set contributes nothing") {
        const auto s = state_of(vec({0.0}), Vector(0), vec({0.0}), sys);
        const auto st = composite_storage(sys, s, composed_vector_field(sys, s, vec({0.0})));
        CHECK(st.s_sigma == 0.0);
    }
}

TEST_CASE("port power", "[interconnect]") {
    const auto sys = composed(curved_problem());
    const auto s = state_of(vec({0.6, 0.1}), vec({0.3}), vec({0.8}), sys);
    const auto r = composed_vector_field(sys, s, Vector::Zero(2));
    SECTION("constant input carries no external power") {
        CHECK(port_power(sys, s, r, Vector::Zero(2)).external == 0.0);
    }
    SECTION("coupling terms cancel") {
        const Vector v_dot = vec({0.3, -0.2});
        const auto pw = port_power(sys, s, r, v_dot);
        CHECK(pw.equality + pw.inequality == Approx(pw.external));
        CHECK(pw.external == Approx(-v_dot.dot(r.x_dot)));
    }
    SECTION("storage rate along the mode flow") {
        const auto& prob = sys.bm().problem();
        auto storage_at = [&](double dt) {
            FullState moved = s;
            moved.x += dt * r.x_dot;
            moved.lambda += dt * r.lambda_dot;
            moved.mu += dt * r.mu_dot;
            return composite_storage(sys, moved, composed_vector_field(sys, moved, Vector::Zero(2))).s_tilde;
        };
        const double h = 1e-6;
        const double fd = (storage_at(h) - storage_at(-h)) / (2.0 * h);
        const Matrix hess_l = prob.objective_hessian(s.x) + s.mu(0) * prob.inequality_hessian(0, s.x);
        const auto pw = port_power(sys, s, r, Vector::Zero(2));
        const double predicted = -r.x_dot.dot(hess_l * r.x_dot) + pw.equality + pw.inequality;
        CHECK(fd == Approx(predicted).epsilon(1e-6));
        CHECK(fd <= 0.0);
    }
    SECTION("equilibrium") {
        const auto prob = scalar_problem(true);
        const auto csys = composed(prob);
        const auto e = state_of(vec({1.0}), Vector(0), vec({2.0}), csys);
        const auto pw = port_power(csys, e, composed_vector_field(csys, e, vec({0.0})), vec({0.0}));
        CHECK(pw.equality == 0.0);
        CHECK(pw.inequality == 0.0);
        CHECK(pw.external == 0.0);
    }
}

TEST_CASE("linearized decay rate", "[interconnect]") {
    // Scalar with tau = 1: x' = -2(x - 2) has rate 2.
    CHECK(linearized_decay_rate(composed(scalar_problem(false)), {vec({2.0}), Vector(0), Vector(0)}) == Approx(2.0));
    // Active constraint: J = [[-2, -1], [1, 0]] has a double eigenvalue -1.
    const auto kkt = active_set_oracle(*scalar_problem(true));
    CHECK(linearized_decay_rate(composed(scalar_problem(true)), kkt) == Approx(1.0).margin(1e-6));
}

TEST_CASE("driven system", "[interconnect]") {
    const auto prob = scalar_problem(true);
    const auto sys = ComposedSystem::driven(ProjectionSystem(prob, vec({1.0})),
                                            {[](double t) { return vec({std::sin(t)}); },
                                             [](double t) { return vec({std::cos(t)}); }});
    CHECK(sys.is_driven());
    CHECK(sys.drive(0.5)(0) == Approx(std::sin(0.5)));
    FullState s{vec({std::sin(0.5)}), Vector(0), vec({0.3}), ActiveSet(1)};
    const auto r = sys.rates(0.5, s);
    CHECK(r.x_dot(0) == Approx(std::cos(0.5)));
    CHECK(r.mu_dot(0) == Approx(std::sin(0.5) - 1.0));
    CHECK_THROWS_AS(composed(prob).drive(0.0), ContractViolation);
}
