#pragma once

#include "pdflow/common.hpp"
#include "pdflow/problem.hpp"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace pdflow {

/// Multipliers at or below this value count as zero when building the active set.
inline constexpr double kMuZeroThreshold = 1e-12;

/// Subset sigma of {0, ..., p-1}: the constraints whose projection is active.
class ActiveSet {
public:
    ActiveSet() = default;
    explicit ActiveSet(std::size_t universe) : members_(universe, false) {}

    static ActiveSet full(std::size_t universe);
    static ActiveSet from_indices(std::size_t universe, const std::vector<std::size_t>& indices);
    static ActiveSet from_bitmask(std::size_t universe, std::uint64_t mask);

    [[nodiscard]] std::size_t universe() const { return members_.size(); }
    [[nodiscard]] std::size_t size() const;
    [[nodiscard]] bool empty() const { return size() == 0; }
    [[nodiscard]] bool is_full() const { return size() == universe(); }
    [[nodiscard]] bool contains(std::size_t i) const;
    void insert(std::size_t i);
    void erase(std::size_t i);

    [[nodiscard]] std::vector<std::size_t> indices() const;
    /// Bit i set iff i is a member. Throws CapabilityError when universe > 64.
    [[nodiscard]] std::uint64_t bitmask() const;
    /// One-based listing, e.g. "{1,3}"; the empty set prints as "{}".
    [[nodiscard]] std::string to_string() const;

    friend bool operator==(const ActiveSet&, const ActiveSet&) = default;

private:
    std::vector<bool> members_;
};

/// Inequality multiplier dynamics tau_mu,i mu_i' = (g_i(u~))^+_{mu_i}.
///
/// The constraint oracles are shared with the wrapped problem; only its
/// inequalities are used.
class ProjectionSystem {
public:
    ProjectionSystem(std::shared_ptr<const ConvexProblem> constraints, Vector tau_mu);

    [[nodiscard]] const ConvexProblem& constraints() const { return *constraints_; }
    [[nodiscard]] std::size_t p() const { return constraints_->p(); }
    [[nodiscard]] std::size_t n() const { return constraints_->n(); }
    [[nodiscard]] const Vector& tau_mu() const { return tau_mu_; }

private:
    std::shared_ptr<const ConvexProblem> constraints_;
    Vector tau_mu_;
};

/// g if mu > 0, max(0, g) if mu == 0. Throws InvariantViolation for mu < 0.
[[nodiscard]] double positive_projection(double g_val, double mu);

/// sigma = { i : mu_i <= kMuZeroThreshold and g_i <= 0 }.
[[nodiscard]] ActiveSet compute_sigma(const Vector& mu, const Vector& g_vals);

/// Rates of the switched system in a given mode: g_i / tau_i off sigma, 0 on sigma.
[[nodiscard]] Vector mode_rates(const ProjectionSystem& sys, const ActiveSet& sigma, const Vector& g_vals);

/// Projected multiplier rates; sigma is derived from (mu, g(u~)).
[[nodiscard]] Vector multiplier_vector_field(const ProjectionSystem& sys, const Vector& u_tilde,
                                             const Vector& mu);

/// Mode storage S_sigma = 1/2 sum_{i not in sigma} tau_i mu_i'^2.
[[nodiscard]] double switched_storage(const ProjectionSystem& sys, const ActiveSet& sigma,
                                      const Vector& mu_dot);

/// y~ = sum_i mu_i grad g_i(u~), summed over every constraint.
[[nodiscard]] Vector output_port(const ProjectionSystem& sys, const Vector& u_tilde, const Vector& mu);

/// d/dt y~ = sum_i mu_i' grad g_i + (sum_i mu_i Hess g_i) u~'.
[[nodiscard]] Vector output_port_rate(const ProjectionSystem& sys, const Vector& u_tilde,
                                      const Vector& u_tilde_dot, const Vector& mu, const Vector& mu_dot);

enum class SwitchKind {
    activation,    ///< mu_i reaches 0 while g_i < 0; storage drops
    deactivation,  ///< g_i crosses 0 from below while mu_i = 0; storage continuous
};

[[nodiscard]] const char* to_string(SwitchKind kind);

struct SwitchEvent {
    double time = 0.0;
    std::size_t index = 0;
    SwitchKind kind = SwitchKind::activation;
    double storage_before = 0.0;
    double storage_after = 0.0;
};

using SwitchLedger = std::vector<SwitchEvent>;

/// One event per index whose membership differs between prev and next, in index
/// order. Storages are evaluated with rates re-derived from g_vals under the
/// intermediate modes, so consecutive events chain before/after values.
///
/// Throws ContractViolation when prev == next, StepTooLarge when a membership
/// change is inconsistent with (mu, g_vals), i.e. the step skipped over a
/// leave-and-return of the same index.
[[nodiscard]] std::vector<SwitchEvent> classify_switch(const ProjectionSystem& sys, const ActiveSet& prev,
                                                       const ActiveSet& next, const Vector& mu,
                                                       const Vector& g_vals, double t);

}  // namespace pdflow
