#pragma once

#include "pdflow/common.hpp"
#include "pdflow/interconnect.hpp"
#include "pdflow/problem.hpp"

#include <memory>
#include <optional>
#include <random>

namespace pdflow::random {

struct QpOptions {
    std::size_t max_n = 5;
    std::size_t max_m = 2;
    std::size_t max_p = 4;
    double eig_min = 0.5;
    double eig_max = 5.0;
    std::optional<std::size_t> p;  ///< fix the number of inequalities
    double min_rate = 0.05;         ///< reject instances that contract slower than this
    double margin = 0.05;           ///< reject near-degenerate complementarity
};

/// Well-posed random QP with a feasible interior point, a random initial state
/// and a horizon derived from the linearization at the optimum.
struct QpInstance {
    std::shared_ptr<const ConvexProblem> problem;
    Vector tau_x;
    Vector tau_lambda;
    Vector tau_mu;
    Vector x0;
    Vector lambda0;
    Vector mu0;
    KktPoint oracle;
    double rate = 0.0;
    double horizon = 0.0;

    [[nodiscard]] ComposedSystem system() const;
};

[[nodiscard]] QpInstance random_qp(std::mt19937_64& rng, const QpOptions& opts = {});

/// Symmetric matrix with eigenvalues drawn from [lo, hi].
[[nodiscard]] Matrix random_spd(std::mt19937_64& rng, Eigen::Index n, double lo, double hi);

/// rows x cols matrix with singular values in [0.5, 2] (full row rank for rows <= cols).
[[nodiscard]] Matrix random_well_conditioned(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols);

[[nodiscard]] Vector uniform_vector(std::mt19937_64& rng, Eigen::Index n, double lo, double hi);

}  // namespace pdflow::random
