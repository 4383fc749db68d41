#pragma once

#include "pdflow/common.hpp"
#include "pdflow/integrator.hpp"
#include "pdflow/interconnect.hpp"
#include "pdflow/monitor.hpp"
#include "pdflow/problem.hpp"

#include <array>
#include <memory>
#include <vector>

namespace pdflow::hvac {

/// Multi-zone RC building. Temperatures in degC, resistances in degC/kW, gains in kW.
struct ThermalNetwork {
    std::size_t N = 0;
    Vector C;       ///< capacitances, transient context only
    Matrix R_zone;  ///< symmetric inter-zone resistances, 0 = no coupling
    Vector R_amb;   ///< R_i0
    double T_inf = 0.0;
    Vector d;  ///< internal heat gains
    double theta = 1.0;

    /// theta = 0 is accepted only when allow_zero_theta is set (degenerate scaling).
    void validate(bool allow_zero_theta = false) const;

    /// Reference building with N zones in a ring (R_ij = 20 between neighbours).
    static ThermalNetwork reference(std::size_t N = 4);
};

struct WelfareParams {
    Vector gamma;
    Vector T_ref;
    Vector b_util;
    std::array<double, 3> rho{0.5, 0.0, 0.0};
    Vector T_min;
    Vector T_max;

    void validate(std::size_t N) const;

    /// Reference comfort and cost parameters, gamma = 1.
    static WelfareParams reference(std::size_t N = 4);
};

/// Piecewise-constant prices over [0, 24] h: price k applies on [breakpoints[k], breakpoints[k+1]).
struct TouSchedule {
    std::vector<double> breakpoints;
    std::vector<double> prices;

    void validate() const;
    [[nodiscard]] std::size_t intervals() const { return prices.size(); }
    [[nodiscard]] double price_at(double hour) const;

    static TouSchedule flat(double price = 1.0);
};

struct LoadProfile {
    double occupancy_peak = 0.0;  ///< kW per zone
    double solar_peak = 0.0;      ///< kW per zone
    double segment_hours = 1.0;   ///< resolution of the quasi-static sweep
};

/// Scalar supply-balance constraint A T + b = theta * total heat to remove.
struct SteadyState {
    Matrix A;  ///< 1 x N
    double b = 0.0;
};

[[nodiscard]] SteadyState steady_state_constraint(const ThermalNetwork& net);

/// Welfare QP over x = (T_1..T_N, q). Inequalities: T_min - T <= 0 (indices
/// 0..N-1) then T - T_max <= 0 (N..2N-1). The generation cost is scaled by price.
[[nodiscard]] ConvexProblem build_welfare_problem(const ThermalNetwork& net, const WelfareParams& params,
                                                  double price = 1.0);

struct Dynamics {
    Vector tau_T;
    double tau_q = 1.0;
    double tau_lambda = 1.0;
    Vector tau_mu_low;
    Vector tau_mu_high;

    static Dynamics unit(std::size_t N);
};

[[nodiscard]] ComposedSystem make_system(std::shared_ptr<const ConvexProblem> problem, const Dynamics& dyn);

struct HvacState {
    Vector T;
    double q = 0.0;
    double lambda = 0.0;
    Vector mu_low;
    Vector mu_high;

    [[nodiscard]] FullState to_full(const ComposedSystem& sys) const;
    static HvacState from_full(const FullState& s);
};

struct HvacRates {
    Vector T_dot;
    double q_dot = 0.0;
    double lambda_dot = 0.0;
    Vector mu_low_dot;
    Vector mu_high_dot;
};

[[nodiscard]] HvacRates hvac_vector_field(const HvacState& state, const ComposedSystem& sys);

/// Base gains plus an occupancy plateau (8-18 h, 1 h cosine ramps) and a
/// half-sine solar bump over 6-18 h peaking at noon.
[[nodiscard]] Vector synth_internal_load(double hour, const Vector& base, double occupancy_peak, double solar_peak);

struct TouOptions {
    IntegratorOptions integrator;
    double chunk = 10.0;                  ///< flow time per settling attempt
    double max_time_constants = 50.0;     ///< settling cap, in units of the slowest linearized time constant
    ConvergenceTolerances tolerances;
    bool keep_trajectories = true;
};

struct SegmentResult {
    std::size_t interval = 0;
    double start_h = 0.0;
    double end_h = 0.0;
    double price = 0.0;
    Vector d;
    Vector T;
    double q = 0.0;
    double lambda = 0.0;
    Vector mu;
    double cooling_load = 0.0;
    double objective = 0.0;
    double settling_time = 0.0;
    KktPoint oracle;
    Trajectory trajectory;
};

struct DailyReport {
    std::vector<SegmentResult> segments;

    [[nodiscard]] double peak_q() const;
};

/// A segment failed to settle onto its optimum.
class ScenarioError : public Error {
public:
    ScenarioError(const std::string& what, std::size_t interval) : Error(what), interval_(interval) {}
    [[nodiscard]] std::size_t interval() const { return interval_; }

private:
    std::size_t interval_;
};

/// Quasi-static sweep over the day: each price interval is cut into load
/// segments, each segment rebuilds the welfare problem and settles from the
/// previous terminal state.
[[nodiscard]] DailyReport run_tou_scenario(const ThermalNetwork& net, const WelfareParams& params,
                                           const TouSchedule& schedule, const LoadProfile& load,
                                           const Dynamics& dyn, const HvacState& initial,
                                           const TouOptions& opts = {});

}  // namespace pdflow::hvac
