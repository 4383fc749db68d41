#include "pdflow/bm_core.hpp"

#include <algorithm>
#include <utility>

namespace pdflow {

namespace {

Eigen::LLT<Matrix> factor_spd(const Matrix& tau, Eigen::Index expected, const char* what) {
    if (tau.rows() != expected || tau.cols() != expected) {
        throw ContractViolation(std::string(what) + " must be " + std::to_string(expected) + "x" +
                                std::to_string(expected));
    }
    if (expected == 0) {
        return {};
    }
    const double scale = std::max(1.0, tau.cwiseAbs().maxCoeff());
    if ((tau - tau.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw ContractViolation(std::string(what) + " must be symmetric");
    }
    Eigen::LLT<Matrix> llt(tau);
    if (llt.info() != Eigen::Success) {
        throw ContractViolation(std::string(what) + " must be positive definite");
    }
    return llt;
}

}  // namespace

BmSystem::BmSystem(std::shared_ptr<const ConvexProblem> problem, Matrix tau_x, Matrix tau_lambda)
    : problem_(std::move(problem)), tau_x_(std::move(tau_x)), tau_lambda_(std::move(tau_lambda)) {
    if (!problem_) {
        throw ContractViolation("BmSystem requires a problem");
    }
    tau_x_llt_ = factor_spd(tau_x_, static_cast<Eigen::Index>(problem_->n()), "tau_x");
    tau_lambda_llt_ = factor_spd(tau_lambda_, static_cast<Eigen::Index>(problem_->m()), "tau_lambda");
}

BmSystem BmSystem::with_diagonal(std::shared_ptr<const ConvexProblem> problem, const Vector& tau_x,
                                 const Vector& tau_lambda) {
    if ((tau_x.size() > 0 && tau_x.minCoeff() <= 0.0) ||
        (tau_lambda.size() > 0 && tau_lambda.minCoeff() <= 0.0)) {
        throw ContractViolation("time constants must be strictly positive");
    }
    return BmSystem(std::move(problem), tau_x.asDiagonal().toDenseMatrix(),
                    tau_lambda.asDiagonal().toDenseMatrix());
}

Vector BmSystem::solve_tau_lambda(const Vector& v) const {
    if (v.size() == 0) {
        return Vector(0);
    }
    return tau_lambda_llt_.solve(v);
}

BmRates bm_vector_field(const BmSystem& sys, const Vector& x, const Vector& lambda, const Vector& u) {
    const auto& problem = sys.problem();
    require_size(x, static_cast<Eigen::Index>(problem.n()), "x");
    require_size(lambda, static_cast<Eigen::Index>(problem.m()), "lambda");
    require_size(u, static_cast<Eigen::Index>(problem.n()), "u");

    BmRates out;
    const Vector force = problem.objective_gradient(x) + problem.equality_matrix().transpose() * lambda + u;
    out.x_dot = -sys.solve_tau_x(force);
    out.lambda_dot = sys.solve_tau_lambda(problem.equality(x));
    out.y = -x;
    return out;
}

double mixed_potential(const BmSystem& sys, const Vector& x, const Vector& lambda) {
    const auto& problem = sys.problem();
    require_size(lambda, static_cast<Eigen::Index>(problem.m()), "lambda");
    return problem.objective(x) + lambda.dot(problem.equality(x));
}

double krasovskii_storage(const BmSystem& sys, const Vector& x_dot, const Vector& lambda_dot) {
    require_size(x_dot, sys.tau_x().rows(), "x_dot");
    require_size(lambda_dot, sys.tau_lambda().rows(), "lambda_dot");
    return 0.5 * x_dot.dot(sys.tau_x() * x_dot) + 0.5 * lambda_dot.dot(sys.tau_lambda() * lambda_dot);
}

double storage_rate(const BmSystem& sys, const Vector& x, const Vector& lambda, const Vector& u,
                    const Vector& u_dot) {
    require_size(u_dot, static_cast<Eigen::Index>(sys.problem().n()), "u_dot");
    const BmRates rates = bm_vector_field(sys, x, lambda, u);
    return -rates.x_dot.dot(sys.problem().objective_hessian(x) * rates.x_dot) - rates.x_dot.dot(u_dot);
}

}  // namespace pdflow
