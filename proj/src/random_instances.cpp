#include "pdflow/random_instances.hpp"

#include "pdflow/bm_core.hpp"
#include "pdflow/switched_flow.hpp"

#include <algorithm>
#include <cmath>

namespace pdflow::random {

namespace {

constexpr int kMaxAttempts = 10000;

Matrix random_orthogonal(std::mt19937_64& rng, Eigen::Index n) {
    std::normal_distribution<double> normal;
    Matrix g(n, n);
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        g.data()[i] = normal(rng);
    }
    Eigen::HouseholderQR<Matrix> qr(g);
    return qr.householderQ();
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

}  // namespace

Vector uniform_vector(std::mt19937_64& rng, Eigen::Index n, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v(i) = u(rng);
    }
    return v;
}

Matrix random_spd(std::mt19937_64& rng, Eigen::Index n, double lo, double hi) {
    const Matrix q = random_orthogonal(rng, n);
    const Vector eig = uniform_vector(rng, n, lo, hi);
    Matrix h = q * eig.asDiagonal() * q.transpose();
    return 0.5 * (h + h.transpose());
}

Matrix random_well_conditioned(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
    if (rows == 0) {
        return Matrix(0, cols);
    }
    const Eigen::Index k = std::min(rows, cols);
    Matrix s = Matrix::Zero(rows, cols);
    s.diagonal().head(k) = uniform_vector(rng, k, 0.5, 2.0);
    return random_orthogonal(rng, rows) * s * random_orthogonal(rng, cols);
}

ComposedSystem QpInstance::system() const {
    return ComposedSystem(BmSystem::with_diagonal(problem, tau_x, tau_lambda), ProjectionSystem(problem, tau_mu));
}

QpInstance random_qp(std::mt19937_64& rng, const QpOptions& opts) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        const auto n = static_cast<Eigen::Index>(uniform_index(rng, 1, opts.max_n));
        const auto m = static_cast<Eigen::Index>(
            uniform_index(rng, 0, std::min<std::size_t>(opts.max_m, static_cast<std::size_t>(n - 1))));
        const auto p = static_cast<Eigen::Index>(opts.p ? *opts.p : uniform_index(rng, 0, opts.max_p));

        QuadraticObjective obj{random_spd(rng, n, opts.eig_min, opts.eig_max), uniform_vector(rng, n, -3.0, 3.0), 0.0};
        const Vector x_feasible = uniform_vector(rng, n, -1.0, 1.0);
        Matrix A = random_well_conditioned(rng, m, n);
        Vector b = -A * x_feasible;
        std::normal_distribution<double> normal;
        Matrix G(p, n);
        for (Eigen::Index i = 0; i < p; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                G(i, j) = normal(rng);
            }
            G.row(i).normalize();
        }
        Vector h = -G * x_feasible - uniform_vector(rng, p, 0.1, 1.0);

        QpInstance inst;
        try {
            inst.problem = std::make_shared<const ConvexProblem>(
                ConvexProblem::quadratic(std::move(obj), std::move(A), std::move(b), std::move(G), std::move(h)));
            inst.oracle = active_set_oracle(*inst.problem);
        } catch (const Error&) {
            continue;
        }
        const Vector g = inst.problem->inequality(inst.oracle.x_star);
        bool degenerate = false;
        for (Eigen::Index i = 0; i < p; ++i) {
            if (!(inst.oracle.mu_star(i) >= opts.margin || g(i) <= -opts.margin)) {
                degenerate = true;
            }
        }
        if (degenerate) {
            continue;
        }
        inst.tau_x = uniform_vector(rng, n, 0.5, 2.0);
        inst.tau_lambda = uniform_vector(rng, m, 0.5, 2.0);
        inst.tau_mu = uniform_vector(rng, p, 0.5, 2.0);
        inst.rate = linearized_decay_rate(inst.system(), inst.oracle);
        if (!(inst.rate >= opts.min_rate)) {
            continue;
        }
        inst.x0 = uniform_vector(rng, n, -2.0, 2.0);
        inst.lambda0 = Vector::Zero(m);
        inst.mu0 = uniform_vector(rng, p, 0.0, 2.0);
        for (Eigen::Index i = 0; i < p; ++i) {
            if (unit(rng) < 0.3) {
                inst.mu0(i) = 0.0;
            }
        }
        inst.horizon = 40.0 / inst.rate + 20.0;
        return inst;
    }
    throw CapabilityError("random_qp: no well-posed instance found");
}

}  // namespace pdflow::random
