#pragma once

#include "pdflow/common.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

namespace pdflow {

/// Value, gradient and Hessian oracles of a scalar C^1 function on R^n.
struct ScalarOracle {
    std::function<double(const Vector&)> value;
    std::function<Vector(const Vector&)> gradient;
    std::function<Matrix(const Vector&)> hessian;
};

/// f(x) = 1/2 x^T H x + c^T x + constant.
struct QuadraticObjective {
    Matrix H;
    Vector c;
    double constant = 0.0;
};

/// Stacked affine inequalities G x + h <= 0 (one row per constraint).
struct AffineInequalities {
    Matrix G;
    Vector h;
};

/// Oracle for the affine function a^T x + b, for building general problems.
[[nodiscard]] ScalarOracle affine_oracle(Vector a, double b);

/// minimize f(x) s.t. A_h x + b_h = 0, g_i(x) <= 0.
///
/// Immutable once constructed. The quadratic/affine flavour keeps its data so the
/// active-set oracle can solve it exactly; the general flavour only exposes oracles.
class ConvexProblem {
public:
    /// Quadratic objective, affine equalities and affine inequalities. Pass empty
    /// matrices (0 rows) for absent constraint blocks. Throws ContractViolation if
    /// dimensions disagree or H is not symmetric positive definite.
    static ConvexProblem quadratic(QuadraticObjective objective, Matrix A_eq, Vector b_eq,
                                   Matrix G, Vector h);

    ConvexProblem(std::size_t n, ScalarOracle objective, Matrix A_eq, Vector b_eq,
                  std::vector<ScalarOracle> inequalities);

    [[nodiscard]] std::size_t n() const { return n_; }
    [[nodiscard]] std::size_t m() const { return static_cast<std::size_t>(A_eq_.rows()); }
    [[nodiscard]] std::size_t p() const { return p_; }

    [[nodiscard]] double objective(const Vector& x) const;
    [[nodiscard]] Vector objective_gradient(const Vector& x) const;
    [[nodiscard]] Matrix objective_hessian(const Vector& x) const;

    /// h(x) = A_h x + b_h.
    [[nodiscard]] Vector equality(const Vector& x) const;
    [[nodiscard]] const Matrix& equality_matrix() const { return A_eq_; }
    [[nodiscard]] const Vector& equality_offset() const { return b_eq_; }

    /// All p inequality values g(x).
    [[nodiscard]] Vector inequality(const Vector& x) const;
    [[nodiscard]] double inequality(std::size_t i, const Vector& x) const;
    [[nodiscard]] Vector inequality_gradient(std::size_t i, const Vector& x) const;
    [[nodiscard]] Matrix inequality_hessian(std::size_t i, const Vector& x) const;
    /// p x n matrix whose rows are the inequality gradients.
    [[nodiscard]] Matrix inequality_jacobian(const Vector& x) const;
    /// sum_i w_i grad g_i(x).
    [[nodiscard]] Vector weighted_inequality_gradient(const Vector& w, const Vector& x) const;

    /// True when the objective is quadratic and every inequality is affine.
    [[nodiscard]] bool is_quadratic() const { return quad_.has_value() && affine_.has_value(); }
    [[nodiscard]] const std::optional<QuadraticObjective>& quadratic_objective() const { return quad_; }
    [[nodiscard]] const std::optional<AffineInequalities>& affine_inequalities() const { return affine_; }

private:
    ConvexProblem() = default;

    void check_point(const Vector& x) const;
    void check_index(std::size_t i) const;

    std::size_t n_ = 0;
    std::size_t p_ = 0;
    std::optional<QuadraticObjective> quad_;
    ScalarOracle objective_;
    Matrix A_eq_;
    Vector b_eq_;
    std::optional<AffineInequalities> affine_;
    std::vector<ScalarOracle> inequalities_;
};

struct KktPoint {
    Vector x_star;
    Vector lambda_star;
    Vector mu_star;
};

/// Max-norms of the individual KKT defects.
struct KktResidual {
    double stationarity = 0.0;
    double equality = 0.0;
    double inequality_violation = 0.0;
    double complementarity = 0.0;
    double dual_negativity = 0.0;

    [[nodiscard]] double max() const;
};

struct LagrangianGradient {
    Vector stationarity;  ///< grad f + sum lambda_i grad h_i + sum mu_i grad g_i
    Vector equality;      ///< h(x)
    Vector inequality;    ///< g(x)
};

[[nodiscard]] LagrangianGradient lagrangian_gradient(const ConvexProblem& problem, const Vector& x,
                                                     const Vector& lambda, const Vector& mu);

[[nodiscard]] KktResidual kkt_residual(const ConvexProblem& problem, const KktPoint& point);

/// Largest p the enumeration oracle accepts.
inline constexpr std::size_t kOracleMaxConstraints = 20;

/// Exact KKT point of a quadratic/affine problem by enumerating every active set
/// in increasing bitmask order and solving the equality-constrained KKT system.
///
/// Throws CapabilityError for non-quadratic data or p > kOracleMaxConstraints,
/// InfeasibleProblem when no candidate set yields a KKT point.
[[nodiscard]] KktPoint active_set_oracle(const ConvexProblem& problem);

}  // namespace pdflow
