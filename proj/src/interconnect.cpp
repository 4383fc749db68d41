#include "pdflow/interconnect.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <limits>
#include <utility>

namespace pdflow {

TimeSignal TimeSignal::constant(Vector v) {
    const auto n = v.size();
    return TimeSignal{[v](double) { return v; }, [n](double) { return Vector::Zero(n).eval(); }};
}

ComposedSystem::ComposedSystem(BmSystem bm, ProjectionSystem proj)
    : bm_(std::move(bm)), proj_(std::move(proj)) {
    if (bm_->problem().n() != proj_.n()) {
        throw ContractViolation("interconnected subsystems disagree on the primal dimension");
    }
}

ComposedSystem::ComposedSystem(ProjectionSystem proj, TimeSignal drive)
    : proj_(std::move(proj)), drive_(std::move(drive)) {
    if (!drive_->value || !drive_->rate) {
        throw ContractViolation("driven system requires both u~(t) and its rate");
    }
}

ComposedSystem ComposedSystem::driven(ProjectionSystem proj, TimeSignal u_tilde) {
    return ComposedSystem(std::move(proj), std::move(u_tilde));
}

void ComposedSystem::set_external_input(TimeSignal v) {
    if (!v.value || !v.rate) {
        throw ContractViolation("external input requires both v(t) and its rate");
    }
    v_ = std::move(v);
}

const BmSystem& ComposedSystem::bm() const {
    if (!bm_) {
        throw ContractViolation("driven system has no equality subsystem");
    }
    return *bm_;
}

std::size_t ComposedSystem::m() const {
    return bm_ ? bm_->problem().m() : proj_.constraints().m();
}

Vector ComposedSystem::external_input(double t) const {
    if (!v_) {
        return Vector::Zero(static_cast<Eigen::Index>(n()));
    }
    Vector v = v_->value(t);
    require_size(v, static_cast<Eigen::Index>(n()), "external input v");
    return v;
}

Vector ComposedSystem::external_input_rate(double t) const {
    if (!v_) {
        return Vector::Zero(static_cast<Eigen::Index>(n()));
    }
    Vector v = v_->rate(t);
    require_size(v, static_cast<Eigen::Index>(n()), "external input rate");
    return v;
}

Vector ComposedSystem::drive(double t) const {
    if (!drive_) {
        throw ContractViolation("system is not driven");
    }
    Vector u = drive_->value(t);
    require_size(u, static_cast<Eigen::Index>(n()), "driven input u~");
    return u;
}

Rates ComposedSystem::rates(double t, const FullState& state) const {
    if (drive_) {
        Rates out;
        Vector u_dot = drive_->rate(t);
        require_size(u_dot, static_cast<Eigen::Index>(n()), "driven input rate");
        const Vector g = proj_.constraints().inequality(drive(t));
        out.x_dot = std::move(u_dot);
        out.lambda_dot = Vector::Zero(static_cast<Eigen::Index>(m()));
        out.mu_dot = mode_rates(proj_, state.sigma, g);
        return out;
    }
    return composed_vector_field(*this, state, external_input(t));
}

Rates composed_vector_field(const ComposedSystem& sys, const FullState& state, const Vector& v) {
    const auto& bm = sys.bm();
    const auto& problem = bm.problem();
    require_size(state.x, static_cast<Eigen::Index>(sys.n()), "x");
    require_size(state.lambda, static_cast<Eigen::Index>(sys.m()), "lambda");
    require_size(state.mu, static_cast<Eigen::Index>(sys.p()), "mu");
    require_size(v, static_cast<Eigen::Index>(sys.n()), "v");

    const auto& constraints = sys.proj().constraints();
    Vector force = problem.objective_gradient(state.x) + problem.equality_matrix().transpose() * state.lambda;
    if (sys.p() > 0) {
        force += constraints.weighted_inequality_gradient(state.mu, state.x);
    }
    force += v;

    Rates out;
    out.x_dot = -bm.solve_tau_x(force);
    out.lambda_dot = bm.solve_tau_lambda(problem.equality(state.x));
    out.mu_dot = sys.p() > 0 ? mode_rates(sys.proj(), state.sigma, constraints.inequality(state.x)) : Vector(0);
    return out;
}

StorageValues composite_storage(const ComposedSystem& sys, const FullState& state, const Rates& rates) {
    StorageValues s;
    if (!sys.is_driven()) {
        s.p_tilde = krasovskii_storage(sys.bm(), rates.x_dot, rates.lambda_dot);
    }
    if (sys.p() > 0) {
        s.s_sigma = switched_storage(sys.proj(), state.sigma, rates.mu_dot);
    }
    s.s_tilde = s.p_tilde + s.s_sigma;
    return s;
}

PortPower port_power(const ComposedSystem& sys, const FullState& state, const Rates& rates,
                     const Vector& v_dot) {
    require_size(v_dot, static_cast<Eigen::Index>(sys.n()), "v_dot");
    PortPower power;
    Vector y_tilde_dot = Vector::Zero(static_cast<Eigen::Index>(sys.n()));
    if (sys.p() > 0) {
        y_tilde_dot = output_port_rate(sys.proj(), state.x, rates.x_dot, state.mu, rates.mu_dot);
    }
    power.inequality = rates.x_dot.dot(y_tilde_dot);
    if (!sys.is_driven()) {
        power.equality = -(y_tilde_dot + v_dot).dot(rates.x_dot);
        power.external = -v_dot.dot(rates.x_dot);
    }
    return power;
}

double linearized_decay_rate(const ComposedSystem& sys, const KktPoint& point) {
    const auto& bm = sys.bm();
    const auto& problem = bm.problem();
    const auto n = static_cast<Eigen::Index>(sys.n());
    const auto m = static_cast<Eigen::Index>(sys.m());
    std::vector<Eigen::Index> active;
    for (Eigen::Index i = 0; i < point.mu_star.size(); ++i) {
        if (point.mu_star(i) > 0.0) {
            active.push_back(i);
        }
    }
    const auto a = static_cast<Eigen::Index>(active.size());
    const Matrix hess = problem.objective_hessian(point.x_star);
    const Matrix A = problem.equality_matrix();
    const auto& c = sys.proj().constraints();
    Matrix J = Matrix::Zero(n + m + a, n + m + a);
    for (Eigen::Index j = 0; j < n; ++j) {
        Vector col = hess.col(j);
        for (const auto i : active) {
            col += point.mu_star(i) * c.inequality_hessian(static_cast<std::size_t>(i), point.x_star).col(j);
        }
        J.block(0, j, n, 1) = -bm.solve_tau_x(col);
    }
    for (Eigen::Index j = 0; j < m; ++j) {
        J.block(0, n + j, n, 1) = -bm.solve_tau_x(A.row(j).transpose());
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        J.block(n, j, m, 1) = bm.solve_tau_lambda(A.col(j));
    }
    for (Eigen::Index k = 0; k < a; ++k) {
        const auto i = static_cast<std::size_t>(active[static_cast<std::size_t>(k)]);
        const Vector grad = c.inequality_gradient(i, point.x_star);
        J.block(0, n + m + k, n, 1) = -bm.solve_tau_x(grad);
        J.block(n + m + k, 0, 1, n) = grad.transpose() / sys.proj().tau_mu()(static_cast<Eigen::Index>(i));
    }
    Eigen::EigenSolver<Matrix> es(J, false);
    double rate = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        rate = std::min(rate, -es.eigenvalues()(i).real());
    }
    return rate;
}

}  // namespace pdflow
