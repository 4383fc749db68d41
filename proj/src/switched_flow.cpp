#include "pdflow/switched_flow.hpp"

#include <algorithm>
#include <utility>

namespace pdflow {

ActiveSet ActiveSet::full(std::size_t universe) {
    ActiveSet s(universe);
    std::fill(s.members_.begin(), s.members_.end(), true);
    return s;
}

ActiveSet ActiveSet::from_indices(std::size_t universe, const std::vector<std::size_t>& indices) {
    ActiveSet s(universe);
    for (const auto i : indices) {
        s.insert(i);
    }
    return s;
}

ActiveSet ActiveSet::from_bitmask(std::size_t universe, std::uint64_t mask) {
    if (universe > 64) {
        throw CapabilityError("ActiveSet bitmask supports at most 64 constraints");
    }
    if (universe < 64 && (mask >> universe) != 0) {
        throw ContractViolation("ActiveSet bitmask has bits beyond the universe");
    }
    ActiveSet s(universe);
    for (std::size_t i = 0; i < universe; ++i) {
        s.members_[i] = ((mask >> i) & 1U) != 0;
    }
    return s;
}

std::size_t ActiveSet::size() const {
    return static_cast<std::size_t>(std::count(members_.begin(), members_.end(), true));
}

bool ActiveSet::contains(std::size_t i) const {
    if (i >= members_.size()) {
        throw ContractViolation("ActiveSet index out of range");
    }
    return members_[i];
}

void ActiveSet::insert(std::size_t i) {
    if (i >= members_.size()) {
        throw ContractViolation("ActiveSet index out of range");
    }
    members_[i] = true;
}

void ActiveSet::erase(std::size_t i) {
    if (i >= members_.size()) {
        throw ContractViolation("ActiveSet index out of range");
    }
    members_[i] = false;
}

std::vector<std::size_t> ActiveSet::indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < members_.size(); ++i) {
        if (members_[i]) {
            out.push_back(i);
        }
    }
    return out;
}

std::uint64_t ActiveSet::bitmask() const {
    if (members_.size() > 64) {
        throw CapabilityError("ActiveSet bitmask supports at most 64 constraints");
    }
    std::uint64_t mask = 0;
    for (std::size_t i = 0; i < members_.size(); ++i) {
        if (members_[i]) {
            mask |= std::uint64_t{1} << i;
        }
    }
    return mask;
}

std::string ActiveSet::to_string() const {
    std::string out = "{";
    bool first = true;
    for (const auto i : indices()) {
        if (!first) {
            out += ",";
        }
        out += std::to_string(i + 1);
        first = false;
    }
    return out + "}";
}

ProjectionSystem::ProjectionSystem(std::shared_ptr<const ConvexProblem> constraints, Vector tau_mu)
    : constraints_(std::move(constraints)), tau_mu_(std::move(tau_mu)) {
    if (!constraints_) {
        throw ContractViolation("ProjectionSystem requires constraint oracles");
    }
    require_size(tau_mu_, static_cast<Eigen::Index>(constraints_->p()), "tau_mu");
    if (tau_mu_.size() > 0 && tau_mu_.minCoeff() <= 0.0) {
        throw ContractViolation("tau_mu must be strictly positive");
    }
}

double positive_projection(double g_val, double mu) {
    if (mu < 0.0) {
        throw InvariantViolation("positive_projection: negative multiplier " + std::to_string(mu));
    }
    if (mu > 0.0 || g_val > 0.0) {
        return g_val;
    }
    return 0.0;
}

ActiveSet compute_sigma(const Vector& mu, const Vector& g_vals) {
    require_size(g_vals, mu.size(), "g_vals");
    ActiveSet sigma(static_cast<std::size_t>(mu.size()));
    for (Eigen::Index i = 0; i < mu.size(); ++i) {
        if (mu(i) <= kMuZeroThreshold && g_vals(i) <= 0.0) {
            sigma.insert(static_cast<std::size_t>(i));
        }
    }
    return sigma;
}

Vector mode_rates(const ProjectionSystem& sys, const ActiveSet& sigma, const Vector& g_vals) {
    const auto p = static_cast<Eigen::Index>(sys.p());
    require_size(g_vals, p, "g_vals");
    if (sigma.universe() != sys.p()) {
        throw ContractViolation("active set universe does not match p");
    }
    Vector rates(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        rates(i) = sigma.contains(static_cast<std::size_t>(i)) ? 0.0 : g_vals(i) / sys.tau_mu()(i);
    }
    return rates;
}

Vector multiplier_vector_field(const ProjectionSystem& sys, const Vector& u_tilde, const Vector& mu) {
    require_size(mu, static_cast<Eigen::Index>(sys.p()), "mu");
    const Vector g = sys.constraints().inequality(u_tilde);
    Vector rates(mu.size());
    for (Eigen::Index i = 0; i < mu.size(); ++i) {
        rates(i) = positive_projection(g(i), mu(i)) / sys.tau_mu()(i);
    }
    return rates;
}

double switched_storage(const ProjectionSystem& sys, const ActiveSet& sigma, const Vector& mu_dot) {
    require_size(mu_dot, static_cast<Eigen::Index>(sys.p()), "mu_dot");
    if (sigma.universe() != sys.p()) {
        throw ContractViolation("active set universe does not match p");
    }
    double s = 0.0;
    for (Eigen::Index i = 0; i < mu_dot.size(); ++i) {
        if (!sigma.contains(static_cast<std::size_t>(i))) {
            s += sys.tau_mu()(i) * mu_dot(i) * mu_dot(i);
        }
    }
    return 0.5 * s;
}

Vector output_port(const ProjectionSystem& sys, const Vector& u_tilde, const Vector& mu) {
    require_size(mu, static_cast<Eigen::Index>(sys.p()), "mu");
    if (mu.size() > 0 && mu.minCoeff() < 0.0) {
        throw InvariantViolation("output_port: negative multiplier");
    }
    return sys.constraints().weighted_inequality_gradient(mu, u_tilde);
}

Vector output_port_rate(const ProjectionSystem& sys, const Vector& u_tilde, const Vector& u_tilde_dot,
                        const Vector& mu, const Vector& mu_dot) {
    const auto& c = sys.constraints();
    require_size(mu, static_cast<Eigen::Index>(sys.p()), "mu");
    require_size(u_tilde_dot, u_tilde.size(), "u_tilde_dot");
    Vector rate = c.weighted_inequality_gradient(mu_dot, u_tilde);
    if (!c.affine_inequalities()) {
        for (std::size_t i = 0; i < c.p(); ++i) {
            const double mi = mu(static_cast<Eigen::Index>(i));
            if (mi != 0.0) {
                rate += mi * (c.inequality_hessian(i, u_tilde) * u_tilde_dot);
            }
        }
    }
    return rate;
}

const char* to_string(SwitchKind kind) {
    return kind == SwitchKind::activation ? "activation" : "deactivation";
}

std::vector<SwitchEvent> classify_switch(const ProjectionSystem& sys, const ActiveSet& prev,
                                         const ActiveSet& next, const Vector& mu, const Vector& g_vals,
                                         double t) {
    if (prev == next) {
        throw ContractViolation("classify_switch: active sets are identical");
    }
    if (prev.universe() != sys.p() || next.universe() != sys.p()) {
        throw ContractViolation("classify_switch: active set universe does not match p");
    }
    require_size(mu, static_cast<Eigen::Index>(sys.p()), "mu");

    std::vector<SwitchEvent> events;
    ActiveSet current = prev;
    double storage = switched_storage(sys, current, mode_rates(sys, current, g_vals));
    for (std::size_t i = 0; i < sys.p(); ++i) {
        const bool was = prev.contains(i);
        const bool is = next.contains(i);
        if (was == is) {
            continue;
        }
        const auto k = static_cast<Eigen::Index>(i);
        SwitchEvent ev;
        ev.time = t;
        ev.index = i;
        if (is) {
            if (mu(k) > kMuZeroThreshold || g_vals(k) > 0.0) {
                throw StepTooLarge("constraint " + std::to_string(i + 1) +
                                   " entered the active set without its multiplier reaching zero");
            }
            ev.kind = SwitchKind::activation;
            current.insert(i);
        } else {
            if (g_vals(k) <= 0.0) {
                throw StepTooLarge("constraint " + std::to_string(i + 1) +
                                   " left the active set while still feasible; refine the step");
            }
            ev.kind = SwitchKind::deactivation;
            current.erase(i);
        }
        ev.storage_before = storage;
        storage = switched_storage(sys, current, mode_rates(sys, current, g_vals));
        ev.storage_after = storage;
        events.push_back(ev);
    }
    return events;
}

}  // namespace pdflow
