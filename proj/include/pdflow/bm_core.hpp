#pragma once

#include "pdflow/common.hpp"
#include "pdflow/problem.hpp"

#include <memory>

namespace pdflow {

/// Equality-constrained primal-dual gradient dynamics in Brayton-Moser form
///
///     -tau_x x'     = grad f(x) + A_h^T lambda + u
///      tau_lambda l' = h(x),          y = -x
///
/// i.e. Q z' = grad P(z) + u with Q = diag(-tau_x, tau_lambda) and mixed potential
/// P = f + lambda^T h. Inequalities of the wrapped problem are ignored here; they
/// belong to the projection subsystem.
class BmSystem {
public:
    /// Throws ContractViolation unless both time-constant matrices are symmetric
    /// positive definite and sized (n x n), (m x m).
    BmSystem(std::shared_ptr<const ConvexProblem> problem, Matrix tau_x, Matrix tau_lambda);

    /// Diagonal time constants given as positive vectors.
    static BmSystem with_diagonal(std::shared_ptr<const ConvexProblem> problem, const Vector& tau_x,
                                  const Vector& tau_lambda);

    [[nodiscard]] const ConvexProblem& problem() const { return *problem_; }
    [[nodiscard]] const std::shared_ptr<const ConvexProblem>& problem_ptr() const { return problem_; }
    [[nodiscard]] const Matrix& tau_x() const { return tau_x_; }
    [[nodiscard]] const Matrix& tau_lambda() const { return tau_lambda_; }

    /// tau_x^{-1} v and tau_lambda^{-1} v.
    [[nodiscard]] Vector solve_tau_x(const Vector& v) const { return tau_x_llt_.solve(v); }
    [[nodiscard]] Vector solve_tau_lambda(const Vector& v) const;

private:
    std::shared_ptr<const ConvexProblem> problem_;
    Matrix tau_x_;
    Matrix tau_lambda_;
    Eigen::LLT<Matrix> tau_x_llt_;
    Eigen::LLT<Matrix> tau_lambda_llt_;
};

struct BmRates {
    Vector x_dot;
    Vector lambda_dot;
    Vector y;  ///< output port y = -x
};

[[nodiscard]] BmRates bm_vector_field(const BmSystem& sys, const Vector& x, const Vector& lambda,
                                      const Vector& u);

/// P(z) = f(x) + lambda^T h(x). Indefinite; diagnostics only.
[[nodiscard]] double mixed_potential(const BmSystem& sys, const Vector& x, const Vector& lambda);

/// Krasovskii-type storage 1/2 x'^T tau_x x' + 1/2 lambda'^T tau_lambda lambda'.
[[nodiscard]] double krasovskii_storage(const BmSystem& sys, const Vector& x_dot,
                                        const Vector& lambda_dot);

/// Closed-form storage rate -x'^T Hess f(x) x' - x'^T u' along the flow.
[[nodiscard]] double storage_rate(const BmSystem& sys, const Vector& x, const Vector& lambda,
                                  const Vector& u, const Vector& u_dot);

}  // namespace pdflow
