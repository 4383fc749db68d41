#include "pdflow/problem.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>

namespace pdflow {

namespace {

void check_symmetric_pd(const Matrix& H) {
    if (H.rows() != H.cols()) {
        throw ContractViolation("objective Hessian must be square");
    }
    const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
    if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw ContractViolation("objective Hessian must be symmetric");
    }
    Eigen::LLT<Matrix> llt(H);
    if (llt.info() != Eigen::Success) {
        throw ContractViolation("objective Hessian must be positive definite");
    }
}

}  // namespace

ScalarOracle affine_oracle(Vector a, double b) {
    const auto n = a.size();
    return ScalarOracle{
        [a, b](const Vector& x) { return a.dot(x) + b; },
        [a](const Vector&) { return a; },
        [n](const Vector&) { return Matrix::Zero(n, n).eval(); },
    };
}

ConvexProblem ConvexProblem::quadratic(QuadraticObjective objective, Matrix A_eq, Vector b_eq,
                                       Matrix G, Vector h) {
    const auto n = objective.H.rows();
    check_symmetric_pd(objective.H);
    if (objective.c.size() != n) {
        throw ContractViolation("objective linear term has wrong length");
    }
    if (A_eq.rows() == 0) {
        A_eq.resize(0, n);
    }
    if (G.rows() == 0) {
        G.resize(0, n);
    }
    if (A_eq.cols() != n || b_eq.size() != A_eq.rows()) {
        throw ContractViolation("equality block (A, b) dimensions disagree with n");
    }
    if (G.cols() != n || h.size() != G.rows()) {
        throw ContractViolation("inequality block (G, h) dimensions disagree with n");
    }

    ConvexProblem problem;
    problem.n_ = static_cast<std::size_t>(n);
    problem.p_ = static_cast<std::size_t>(G.rows());
    problem.quad_ = std::move(objective);
    problem.A_eq_ = std::move(A_eq);
    problem.b_eq_ = std::move(b_eq);
    problem.affine_ = AffineInequalities{std::move(G), std::move(h)};
    return problem;
}

ConvexProblem::ConvexProblem(std::size_t n, ScalarOracle objective, Matrix A_eq, Vector b_eq,
                             std::vector<ScalarOracle> inequalities)
    : n_(n), p_(inequalities.size()), objective_(std::move(objective)), A_eq_(std::move(A_eq)),
      b_eq_(std::move(b_eq)), inequalities_(std::move(inequalities)) {
    const auto ni = static_cast<Eigen::Index>(n);
    if (A_eq_.rows() == 0) {
        A_eq_.resize(0, ni);
    }
    if (A_eq_.cols() != ni || b_eq_.size() != A_eq_.rows()) {
        throw ContractViolation("equality block (A, b) dimensions disagree with n");
    }
    if (!objective_.value || !objective_.gradient || !objective_.hessian) {
        throw ContractViolation("objective oracle is incomplete");
    }
    for (const auto& g : inequalities_) {
        if (!g.value || !g.gradient || !g.hessian) {
            throw ContractViolation("inequality oracle is incomplete");
        }
    }
}

void ConvexProblem::check_point(const Vector& x) const {
    require_size(x, static_cast<Eigen::Index>(n_), "primal point");
}

void ConvexProblem::check_index(std::size_t i) const {
    if (i >= p_) {
        throw ContractViolation("inequality index " + std::to_string(i) + " out of range");
    }
}

double ConvexProblem::objective(const Vector& x) const {
    check_point(x);
    if (quad_) {
        return 0.5 * x.dot(quad_->H * x) + quad_->c.dot(x) + quad_->constant;
    }
    const double value = objective_.value(x);
    if (!std::isfinite(value)) {
        throw EvaluationError("objective value is not finite");
    }
    return value;
}

Vector ConvexProblem::objective_gradient(const Vector& x) const {
    check_point(x);
    if (quad_) {
        return quad_->H * x + quad_->c;
    }
    Vector grad = objective_.gradient(x);
    if (grad.size() != x.size() || !grad.allFinite()) {
        throw EvaluationError("objective gradient oracle returned an invalid vector");
    }
    return grad;
}

Matrix ConvexProblem::objective_hessian(const Vector& x) const {
    check_point(x);
    if (quad_) {
        return quad_->H;
    }
    Matrix hess = objective_.hessian(x);
    if (hess.rows() != x.size() || hess.cols() != x.size() || !hess.allFinite()) {
        throw EvaluationError("objective Hessian oracle returned an invalid matrix");
    }
    return hess;
}

Vector ConvexProblem::equality(const Vector& x) const {
    check_point(x);
    return A_eq_ * x + b_eq_;
}

Vector ConvexProblem::inequality(const Vector& x) const {
    check_point(x);
    if (affine_) {
        return affine_->G * x + affine_->h;
    }
    Vector out(static_cast<Eigen::Index>(p_));
    for (std::size_t i = 0; i < p_; ++i) {
        out(static_cast<Eigen::Index>(i)) = inequality(i, x);
    }
    return out;
}

double ConvexProblem::inequality(std::size_t i, const Vector& x) const {
    check_index(i);
    check_point(x);
    const auto row = static_cast<Eigen::Index>(i);
    if (affine_) {
        return affine_->G.row(row).dot(x) + affine_->h(row);
    }
    const double value = inequalities_[i].value(x);
    if (!std::isfinite(value)) {
        throw EvaluationError("inequality " + std::to_string(i) + " value is not finite");
    }
    return value;
}

Vector ConvexProblem::inequality_gradient(std::size_t i, const Vector& x) const {
    check_index(i);
    check_point(x);
    if (affine_) {
        return affine_->G.row(static_cast<Eigen::Index>(i)).transpose();
    }
    Vector grad = inequalities_[i].gradient(x);
    if (grad.size() != x.size() || !grad.allFinite()) {
        throw EvaluationError("inequality " + std::to_string(i) + " gradient is invalid");
    }
    return grad;
}

Matrix ConvexProblem::inequality_hessian(std::size_t i, const Vector& x) const {
    check_index(i);
    check_point(x);
    if (affine_) {
        return Matrix::Zero(x.size(), x.size());
    }
    Matrix hess = inequalities_[i].hessian(x);
    if (hess.rows() != x.size() || hess.cols() != x.size() || !hess.allFinite()) {
        throw EvaluationError("inequality " + std::to_string(i) + " Hessian is invalid");
    }
    return hess;
}

Matrix ConvexProblem::inequality_jacobian(const Vector& x) const {
    check_point(x);
    if (affine_) {
        return affine_->G;
    }
    Matrix J(static_cast<Eigen::Index>(p_), x.size());
    for (std::size_t i = 0; i < p_; ++i) {
        J.row(static_cast<Eigen::Index>(i)) = inequality_gradient(i, x).transpose();
    }
    return J;
}

Vector ConvexProblem::weighted_inequality_gradient(const Vector& w, const Vector& x) const {
    require_size(w, static_cast<Eigen::Index>(p_), "inequality weights");
    check_point(x);
    if (affine_) {
        return affine_->G.transpose() * w;
    }
    Vector out = Vector::Zero(x.size());
    for (std::size_t i = 0; i < p_; ++i) {
        const double wi = w(static_cast<Eigen::Index>(i));
        if (wi != 0.0) {
            out += wi * inequality_gradient(i, x);
        }
    }
    return out;
}

double KktResidual::max() const {
    return std::max({stationarity, equality, inequality_violation, complementarity, dual_negativity});
}

LagrangianGradient lagrangian_gradient(const ConvexProblem& problem, const Vector& x,
                                       const Vector& lambda, const Vector& mu) {
    require_size(x, static_cast<Eigen::Index>(problem.n()), "x");
    require_size(lambda, static_cast<Eigen::Index>(problem.m()), "lambda");
    require_size(mu, static_cast<Eigen::Index>(problem.p()), "mu");
    if (mu.size() > 0 && mu.minCoeff() < 0.0) {
        throw ContractViolation("lagrangian_gradient: mu must be nonnegative");
    }
    LagrangianGradient out;
    out.stationarity = problem.objective_gradient(x) + problem.equality_matrix().transpose() * lambda +
                       problem.weighted_inequality_gradient(mu, x);
    out.equality = problem.equality(x);
    out.inequality = problem.inequality(x);
    return out;
}

KktResidual kkt_residual(const ConvexProblem& problem, const KktPoint& point) {
    require_size(point.x_star, static_cast<Eigen::Index>(problem.n()), "x_star");
    require_size(point.lambda_star, static_cast<Eigen::Index>(problem.m()), "lambda_star");
    require_size(point.mu_star, static_cast<Eigen::Index>(problem.p()), "mu_star");

    const Vector& x = point.x_star;
    const Vector& mu = point.mu_star;
    const Vector g = problem.inequality(x);
    const Vector stationarity = problem.objective_gradient(x) +
                                problem.equality_matrix().transpose() * point.lambda_star +
                                problem.weighted_inequality_gradient(mu, x);

    KktResidual r;
    r.stationarity = max_norm(stationarity);
    r.equality = max_norm(problem.equality(x));
    r.inequality_violation = g.size() == 0 ? 0.0 : std::max(0.0, g.maxCoeff());
    r.complementarity = max_norm(mu.cwiseProduct(g));
    r.dual_negativity = mu.size() == 0 ? 0.0 : std::max(0.0, -mu.minCoeff());
    return r;
}

KktPoint active_set_oracle(const ConvexProblem& problem) {
    if (!problem.is_quadratic()) {
        throw CapabilityError("active_set_oracle requires a quadratic objective and affine constraints");
    }
    if (problem.p() > kOracleMaxConstraints) {
        throw CapabilityError("active_set_oracle: p = " + std::to_string(problem.p()) +
                              " exceeds the enumeration bound of " +
                              std::to_string(kOracleMaxConstraints));
    }

    const auto& quad = *problem.quadratic_objective();
    const auto& ineq = *problem.affine_inequalities();
    const auto n = static_cast<Eigen::Index>(problem.n());
    const auto m = static_cast<Eigen::Index>(problem.m());
    const auto p = static_cast<Eigen::Index>(problem.p());
    const Matrix& A = problem.equality_matrix();
    const Vector& b = problem.equality_offset();

    const double data_scale = std::max({1.0, quad.H.cwiseAbs().maxCoeff(), max_norm(quad.c),
                                        A.size() ? A.cwiseAbs().maxCoeff() : 0.0, max_norm(b),
                                        ineq.G.size() ? ineq.G.cwiseAbs().maxCoeff() : 0.0,
                                        max_norm(ineq.h)});
    const double feasibility_tol = 1e-9 * data_scale;

    const std::uint32_t candidates = std::uint32_t{1} << static_cast<std::uint32_t>(p);
    for (std::uint32_t mask = 0; mask < candidates; ++mask) {
        std::vector<Eigen::Index> active;
        for (Eigen::Index i = 0; i < p; ++i) {
            if (mask & (std::uint32_t{1} << static_cast<std::uint32_t>(i))) {
                active.push_back(i);
            }
        }
        const auto k = static_cast<Eigen::Index>(active.size());
        const Eigen::Index dim = n + m + k;

        Matrix K = Matrix::Zero(dim, dim);
        Vector rhs = Vector::Zero(dim);
        K.topLeftCorner(n, n) = quad.H;
        rhs.head(n) = -quad.c;
        if (m > 0) {
            K.block(0, n, n, m) = A.transpose();
            K.block(n, 0, m, n) = A;
            rhs.segment(n, m) = -b;
        }
        for (Eigen::Index j = 0; j < k; ++j) {
            const Eigen::Index row = n + m + j;
            K.block(0, row, n, 1) = ineq.G.row(active[j]).transpose();
            K.block(row, 0, 1, n) = ineq.G.row(active[j]);
            rhs(row) = -ineq.h(active[j]);
        }

        Eigen::FullPivLU<Matrix> lu(K);
        lu.setThreshold(1e-11);
        if (!lu.isInvertible()) {
            continue;
        }
        const Vector sol = lu.solve(rhs);

        KktPoint point;
        point.x_star = sol.head(n);
        point.lambda_star = sol.segment(n, m);
        point.mu_star = Vector::Zero(p);
        bool dual_ok = true;
        for (Eigen::Index j = 0; j < k; ++j) {
            const double mu = sol(n + m + j);
            if (mu < -feasibility_tol) {
                dual_ok = false;
                break;
            }
            point.mu_star(active[j]) = std::max(0.0, mu);
        }
        if (!dual_ok) {
            continue;
        }
        if (p > 0 && (ineq.G * point.x_star + ineq.h).maxCoeff() > feasibility_tol) {
            continue;
        }
        if (kkt_residual(problem, point).max() > feasibility_tol) {
            continue;
        }
        return point;
    }
    throw InfeasibleProblem("active_set_oracle: no active set yields a KKT point");
}

}  // namespace pdflow
