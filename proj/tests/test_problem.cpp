#include "fixtures.hpp"

#include <catch_amalgamated.hpp>

using namespace pdflow;
using namespace fixtures;
using Catch::Approx;

TEST_CASE("lagrangian gradient vanishes at stationary points", "[problem]") {
    SECTION("unconstrained minimum") {
        const auto prob = scalar_problem(false);
        const auto lg = lagrangian_gradient(*prob, vec({2.0}), Vector(0), Vector(0));
        CHECK(lg.stationarity(0) == 0.0);
        CHECK(lg.equality.size() == 0);
        CHECK(lg.inequality.size() == 0);
    }
    SECTION("equality constrained") {
        const auto lg = lagrangian_gradient(*eq_problem(), vec({1.0, 1.0}), vec({-2.0}), Vector(0));
        CHECK(max_norm(lg.stationarity) == 0.0);
        CHECK(lg.equality(0) == 0.0);
    }
    SECTION("inequality constrained") {
        const auto lg = lagrangian_gradient(*scalar_problem(true), vec({1.0}), Vector(0), vec({2.0}));
        CHECK(lg.stationarity(0) == 0.0);
        CHECK(lg.inequality(0) == 0.0);
    }
}

TEST_CASE("lagrangian gradient is affine in the multipliers", "[problem]") {
    const auto prob = qp(mat({{3.0, 1.0}, {1.0, 2.0}}), vec({1.0, -1.0}), mat({{1.0, 0.0}, {1.0, 1.0}}),
                         vec({-0.5, -2.0}));
    const Vector x = vec({0.3, -0.7});
    const Vector mu1 = vec({0.2, 1.5});
    const Vector mu2 = vec({2.0, 0.1});
    const Vector lhs = lagrangian_gradient(*prob, x, Vector(0), 0.25 * mu1 + 0.75 * mu2).stationarity;
    const Vector rhs = 0.25 * lagrangian_gradient(*prob, x, Vector(0), mu1).stationarity +
                       0.75 * lagrangian_gradient(*prob, x, Vector(0), mu2).stationarity;
    CHECK(max_norm(lhs - rhs) < 1e-14);
}

TEST_CASE("kkt residual", "[problem]") {
    const auto prob = scalar_problem(true);
    SECTION("at the optimum") {
        CHECK(kkt_residual(*prob, {vec({1.0}), Vector(0), vec({2.0})}).max() == 0.0);
    }
    SECTION("at the unconstrained minimum") {
        const auto r = kkt_residual(*prob, {vec({2.0}), Vector(0), vec({0.0})});
        CHECK(r.inequality_violation == Approx(1.0));
        CHECK(r.stationarity == 0.0);
        CHECK(r.equality == 0.0);
        CHECK(r.complementarity == 0.0);
        CHECK(r.dual_negativity == 0.0);
    }
    SECTION("negative multiplier") {
        const auto r = kkt_residual(*prob, {vec({1.0}), Vector(0), vec({-1.0})});
        CHECK(r.dual_negativity == Approx(1.0));
    }
}

TEST_CASE("active-set oracle", "[problem]") {
    SECTION("unconstrained") {
        pdflow::QuadraticObjective f{mat({{2.0}}), vec({-6.0}), 9.0};
        const auto prob = ConvexProblem::quadratic(f, none(1), Vector(0), none(1), Vector(0));
        CHECK(active_set_oracle(prob).x_star(0) == Approx(3.0));
    }
    SECTION("equality") {
        const auto kkt = active_set_oracle(*eq_problem());
        CHECK(kkt.x_star(0) == Approx(1.0));
        CHECK(kkt.x_star(1) == Approx(1.0));
        CHECK(kkt.lambda_star(0) == Approx(-2.0));
    }
    SECTION("inequality") {
        const auto prob = scalar_problem(true);
        const auto kkt = active_set_oracle(*prob);
        CHECK(kkt.x_star(0) == Approx(1.0));
        CHECK(kkt.mu_star(0) == Approx(2.0));
        CHECK(kkt_residual(*prob, kkt).max() <= 1e-10);
    }
    SECTION("infeasible") {
        const auto prob = qp(mat({{2.0}}), vec({0.0}), mat({{1.0}, {-1.0}}), vec({1.0, 1.0}));
        CHECK_THROWS_AS(active_set_oracle(*prob), InfeasibleProblem);
    }
    SECTION("general oracles are rejected") {
        ScalarOracle f{[](const Vector& x) { return std::exp(x(0)); },
                       [](const Vector& x) { return Vector::Constant(1, std::exp(x(0))); },
                       [](const Vector& x) { return Matrix::Constant(1, 1, std::exp(x(0))); }};
        const ConvexProblem prob(1, f, none(1), Vector(0), {});
        CHECK_THROWS_AS(active_set_oracle(prob), CapabilityError);
    }
}

TEST_CASE("problem construction checks", "[problem]") {
    SECTION("indefinite Hessian") {
        CHECK_THROWS_AS(qp(mat({{1.0, 0.0}, {0.0, -1.0}}), Vector::Zero(2), none(2), Vector(0)), ContractViolation);
    }
    SECTION("dimension mismatch") {
        CHECK_THROWS_AS(qp(mat({{1.0}}), vec({0.0, 0.0}), none(1), Vector(0)), ContractViolation);
        CHECK_THROWS_AS(qp(mat({{1.0}}), vec({0.0}), mat({{1.0, 1.0}}), vec({0.0})), ContractViolation);
    }
    SECTION("point of the wrong size") {
        CHECK_THROWS_AS((void)scalar_problem(true)->objective(vec({1.0, 2.0})), ContractViolation);
    }
}

TEST_CASE("affine oracle", "[problem]") {
    const auto g = affine_oracle(vec({1.0, -2.0}), 0.5);
    const Vector x = vec({3.0, 1.0});
    CHECK(g.value(x) == Approx(1.5));
    CHECK(max_norm(g.gradient(x) - vec({1.0, -2.0})) == 0.0);
    CHECK(g.hessian(x).isZero());
}

TEST_CASE("general problem evaluates user oracles", "[problem]") {
    ScalarOracle f{[](const Vector& x) { return std::exp(x(0)) + x(1) * x(1); },
                   [](const Vector& x) { return vec({std::exp(x(0)), 2.0 * x(1)}); },
                   [](const Vector& x) { return mat({{std::exp(x(0)), 0.0}, {0.0, 2.0}}); }};
    ScalarOracle g{[](const Vector& x) { return x.squaredNorm() - 1.0; }, [](const Vector& x) { return Vector(2.0 * x); },
                   [](const Vector&) { return Matrix(2.0 * Matrix::Identity(2, 2)); }};
    const ConvexProblem prob(2, f, none(2), Vector(0), {g});
    CHECK_FALSE(prob.is_quadratic());
    const Vector x = vec({0.2, -0.4});
    const auto fd = fd_gradient([&](const Vector& y) { return prob.objective(y); }, x);
    CHECK(rel_error(prob.objective_gradient(x), fd) < 1e-8);
    CHECK(prob.inequality(0, x) == Approx(-0.8));
    const Matrix J = prob.inequality_jacobian(x);
    CHECK(J.rows() == 1);
    CHECK(rel_error(J.row(0).transpose(), vec({0.4, -0.8})) < 1e-15);
}
