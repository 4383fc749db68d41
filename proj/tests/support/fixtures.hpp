#pragma once

#include "pdflow/bm_core.hpp"
#include "pdflow/interconnect.hpp"
#include "pdflow/problem.hpp"
#include "pdflow/switched_flow.hpp"

#include <cmath>
#include <functional>
#include <memory>

namespace fixtures {

using pdflow::ConvexProblem;
using pdflow::Matrix;
using pdflow::Vector;

inline Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) {
        out(i++) = x;
    }
    return out;
}

inline Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
    const auto r = static_cast<Eigen::Index>(rows.size());
    const auto c = r == 0 ? 0 : static_cast<Eigen::Index>(rows.begin()->size());
    Matrix out(r, c);
    Eigen::Index i = 0;
    for (const auto& row : rows) {
        Eigen::Index j = 0;
        for (double x : row) {
            out(i, j++) = x;
        }
        ++i;
    }
    return out;
}

inline Matrix none(Eigen::Index n) { return Matrix(0, n); }

// f = (x - 2)^2, optionally with g = x - 1 <= 0.
inline std::shared_ptr<const ConvexProblem> scalar_problem(bool with_inequality) {
    pdflow::QuadraticObjective f{mat({{2.0}}), vec({-4.0}), 4.0};
    if (with_inequality) {
        return std::make_shared<const ConvexProblem>(
            ConvexProblem::quadratic(f, none(1), Vector(0), mat({{1.0}}), vec({-1.0})));
    }
    return std::make_shared<const ConvexProblem>(ConvexProblem::quadratic(f, none(1), Vector(0), none(1), Vector(0)));
}

// f = x1^2 + x2^2, h = x1 + x2 - 2.
inline std::shared_ptr<const ConvexProblem> eq_problem() {
    pdflow::QuadraticObjective f{2.0 * Matrix::Identity(2, 2), Vector::Zero(2), 0.0};
    return std::make_shared<const ConvexProblem>(
        ConvexProblem::quadratic(f, mat({{1.0, 1.0}}), vec({-2.0}), none(2), Vector(0)));
}

// Objective and inequalities from G x + h with the given objective.
inline std::shared_ptr<const ConvexProblem> qp(Matrix H, Vector c, Matrix G, Vector h) {
    const auto n = H.rows();
    return std::make_shared<const ConvexProblem>(ConvexProblem::quadratic(
        {std::move(H), std::move(c), 0.0}, none(n), Vector(0), std::move(G), std::move(h)));
}

inline pdflow::ComposedSystem composed(const std::shared_ptr<const ConvexProblem>& prob, double tau = 1.0) {
    const auto n = static_cast<Eigen::Index>(prob->n());
    const auto m = static_cast<Eigen::Index>(prob->m());
    const auto p = static_cast<Eigen::Index>(prob->p());
    return {pdflow::BmSystem::with_diagonal(prob, Vector::Constant(n, tau), Vector::Constant(m, tau)),
            pdflow::ProjectionSystem(prob, Vector::Constant(p, tau))};
}

/// Central-difference gradient.
inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x, double h = 1e-5) {
    Vector g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Vector xp = x;
        Vector xm = x;
        xp(i) += h;
        xm(i) -= h;
        g(i) = (f(xp) - f(xm)) / (2.0 * h);
    }
    return g;
}

/// Central-difference Jacobian of a vector map, one column per coordinate.
inline Matrix fd_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& x, double h = 1e-5) {
    const Vector f0 = f(x);
    Matrix J(f0.size(), x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Vector xp = x;
        Vector xm = x;
        xp(i) += h;
        xm(i) -= h;
        J.col(i) = (f(xp) - f(xm)) / (2.0 * h);
    }
    return J;
}

/// max|a - b| / max(1, max|b|).
inline double rel_error(const Matrix& a, const Matrix& b) {
    if (a.size() == 0) {
        return 0.0;
    }
    const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    return (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace fixtures
