#pragma once

#include "pdflow/bm_core.hpp"
#include "pdflow/common.hpp"
#include "pdflow/switched_flow.hpp"

#include <functional>
#include <optional>

namespace pdflow {

/// Primal, equality-dual and inequality-dual variables plus the mode in force.
struct FullState {
    Vector x;
    Vector lambda;
    Vector mu;
    ActiveSet sigma;
};

struct Rates {
    Vector x_dot;
    Vector lambda_dot;
    Vector mu_dot;
};

/// A piecewise-C^1 exogenous signal and its time derivative.
struct TimeSignal {
    std::function<Vector(double)> value;
    std::function<Vector(double)> rate;

    static TimeSignal constant(Vector v);
};

/// Power-conserving interconnection of the Brayton-Moser equality system with the
/// switched projection system through u = y~ + v and u~ = x, giving
///
///   -tau_x x'     = grad f + A_h^T lambda + sum mu_i grad g_i + v
///    tau_lambda l' = h(x)
///    tau_mu mu'    = (g(x))^+_mu
///
/// A driven instance replaces the primal descent by a prescribed u~(t), leaving the
/// projection subsystem alone under an exogenous input.
class ComposedSystem {
public:
    /// Both subsystems must wrap problems of the same dimension n.
    ComposedSystem(BmSystem bm, ProjectionSystem proj);

    static ComposedSystem driven(ProjectionSystem proj, TimeSignal u_tilde);

    /// Exogenous input v(t) on the primal equation (default 0).
    void set_external_input(TimeSignal v);

    [[nodiscard]] bool is_driven() const { return drive_.has_value(); }
    [[nodiscard]] const BmSystem& bm() const;
    [[nodiscard]] const ProjectionSystem& proj() const { return proj_; }
    [[nodiscard]] std::size_t n() const { return proj_.n(); }
    [[nodiscard]] std::size_t m() const;
    [[nodiscard]] std::size_t p() const { return proj_.p(); }

    [[nodiscard]] Vector external_input(double t) const;
    [[nodiscard]] Vector external_input_rate(double t) const;
    /// Prescribed u~(t) for driven systems; throws ContractViolation otherwise.
    [[nodiscard]] Vector drive(double t) const;

    /// Rates at time t under state.sigma (or the driven input).
    [[nodiscard]] Rates rates(double t, const FullState& state) const;

private:
    ComposedSystem(ProjectionSystem proj, TimeSignal drive);

    std::optional<BmSystem> bm_;
    ProjectionSystem proj_;
    std::optional<TimeSignal> drive_;
    std::optional<TimeSignal> v_;
};

/// Full primal-dual field under state.sigma with a given constant v.
[[nodiscard]] Rates composed_vector_field(const ComposedSystem& sys, const FullState& state, const Vector& v);

struct StorageValues {
    double p_tilde = 0.0;  ///< Krasovskii storage of the equality part
    double s_sigma = 0.0;  ///< mode storage of the projection part
    double s_tilde = 0.0;  ///< composite P~ + S_sigma
};

[[nodiscard]] StorageValues composite_storage(const ComposedSystem& sys, const FullState& state,
                                              const Rates& rates);

struct PortPower {
    double equality = 0.0;    ///< u'^T y' with u = y~ + v, y = -x
    double inequality = 0.0;  ///< u~'^T y~'
    double external = 0.0;    ///< -v'^T x'
};

[[nodiscard]] PortPower port_power(const ComposedSystem& sys, const FullState& state, const Rates& rates,
                                   const Vector& v_dot);

/// Slowest decay rate min(-Re eig) of the closed loop linearized at a KKT point,
/// with the multipliers of inactive constraints frozen at zero.
[[nodiscard]] double linearized_decay_rate(const ComposedSystem& sys, const KktPoint& point);

}  // namespace pdflow
