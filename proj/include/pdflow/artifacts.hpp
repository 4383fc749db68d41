#pragma once

#include "pdflow/common.hpp"
#include "pdflow/hvac.hpp"
#include "pdflow/integrator.hpp"
#include "pdflow/problem.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>

namespace pdflow::artifacts {

/// Missing or malformed artifact file.
class ArtifactError : public Error {
public:
    using Error::Error;
};

/// Columns: t, x1..xn, lambda1..lambdam, mu1..mup, sigma (bitmask), P_tilde,
/// S_sigma, S_tilde, P_eq, P_ineq, P_ext, phase.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

struct TrajectoryMeta {
    bool driven = false;
    double rel_tol = 1e-10;
    double event_tol = 1e-10;
};

/// Dimensions come from the header. Rates are not stored and stay empty.
[[nodiscard]] Trajectory read_trajectory_csv(std::istream& in, const TrajectoryMeta& meta);

/// Columns: t, index (1-based), kind, S_before, S_after.
void write_ledger_csv(std::ostream& out, const SwitchLedger& ledger);
[[nodiscard]] SwitchLedger read_ledger_csv(std::istream& in);

/// Columns: t, sigma, P_tilde, S_sigma, S_tilde, phase.
void write_storage_csv(std::ostream& out, const Trajectory& traj);

/// Switching sequence with the storage in force on each interval.
[[nodiscard]] std::string ledger_table(const Trajectory& traj);

[[nodiscard]] nlohmann::json oracle_json(const KktPoint& point, const KktResidual& residual);
[[nodiscard]] KktPoint read_oracle_json(const nlohmann::json& j);

/// Columns: interval, start_h, end_h, price, q, T1..TN, cooling_load, objective, settling_time.
void write_daily_report_csv(std::ostream& out, const hvac::DailyReport& report);

}  // namespace pdflow::artifacts
