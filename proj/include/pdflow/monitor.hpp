#pragma once

#include "pdflow/integrator.hpp"
#include "pdflow/problem.hpp"
#include "pdflow/switched_flow.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace pdflow {

enum class Outcome { passed, failed, not_applicable, inconclusive };

[[nodiscard]] const char* to_string(Outcome outcome);

struct CertificateReport {
    std::string name;
    Outcome outcome = Outcome::passed;
    double worst_violation = 0.0;
    std::vector<double> location;  ///< time(s) of the worst violation
    double tolerance = 0.0;
    std::string detail;

    [[nodiscard]] bool passed() const { return outcome == Outcome::passed; }
    [[nodiscard]] bool failed() const { return outcome == Outcome::failed; }
};

/// Default inequality budget: max(1e-8, 10 * rel_tol * scale).
[[nodiscard]] double integration_budget(const Trajectory& traj, double scale);

/// P~ (p = 0) or S~ (p > 0) non-increasing across consecutive samples.
/// Not applicable to driven trajectories.
[[nodiscard]] CertificateReport check_unforced_decrease(const Trajectory& traj,
                                                        std::optional<double> tolerance = std::nullopt);

/// Revisit inequality S(t_j) - S(t_i) <= int_{t_i}^{t_j} u~'^T y~' dt for consecutive
/// visits of sigma_p. The integral is read from the port-energy accumulators.
[[nodiscard]] CertificateReport check_hybrid_passivity(const Trajectory& traj, const ActiveSet& sigma_p,
                                                       std::optional<double> tolerance = std::nullopt);

/// Runs check_hybrid_passivity for every visited mode and folds the results.
[[nodiscard]] CertificateReport check_hybrid_passivity_all(const Trajectory& traj,
                                                           std::optional<double> tolerance = std::nullopt);

/// Activations strictly decrease the mode storage, deactivations preserve it.
[[nodiscard]] CertificateReport check_switch_ledger(const Trajectory& traj,
                                                    std::optional<double> tolerance = std::nullopt);

/// V(mu) = 1/2 (mu - mu_bar)^T tau_mu (mu - mu_bar) non-increasing under constant u~*,
/// read from the trajectory's x. Throws PreconditionError if mu_bar is not in Omega_e.
[[nodiscard]] CertificateReport check_quadratic_norm(const Trajectory& traj, const ProjectionSystem& sys,
                                                     const Vector& mu_bar,
                                                     std::optional<double> tolerance = std::nullopt);

struct ConvergenceTolerances {
    double x = 1e-4;
    double kkt = 1e-6;
};

struct ConvergenceReport {
    CertificateReport report;
    std::optional<double> settling_time;
};

[[nodiscard]] ConvergenceReport check_convergence(const Trajectory& traj, const ConvexProblem& problem,
                                                  const KktPoint& oracle, ConvergenceTolerances tol = {});

/// True iff any report failed (not-applicable and inconclusive do not count).
[[nodiscard]] bool any_failed(const std::vector<CertificateReport>& reports);

[[nodiscard]] nlohmann::json to_json(const CertificateReport& report);
[[nodiscard]] nlohmann::json to_json(const std::vector<CertificateReport>& reports);
[[nodiscard]] std::string to_table(const std::vector<CertificateReport>& reports);

}  // namespace pdflow
