#pragma once

#include "pdflow/common.hpp"
#include "pdflow/interconnect.hpp"
#include "pdflow/switched_flow.hpp"

#include <cstddef>
#include <vector>

namespace pdflow {

struct IntegratorOptions {
    double dt_init = 1e-3;
    double dt_min = 1e-12;
    double dt_max = 0.1;
    double event_tol = 1e-10;  ///< |event function| at a located root
    double rel_tol = 1e-10;    ///< embedded error control
    double abs_tol = 1e-12;
    double horizon = 10.0;
    double record_stride = 0.05;
    bool adaptive = true;  ///< false: fixed steps of dt_max

    /// Throws ContractViolation on inconsistent settings.
    void validate() const;
};

enum class SamplePhase {
    regular,
    pre_event,   ///< state at a switch, evaluated in the mode in force before it
    post_event,  ///< same instant, evaluated in the new mode
};

/// Port powers integrated along the run from t = 0.
struct PortEnergy {
    double equality = 0.0;
    double inequality = 0.0;
    double external = 0.0;
};

struct Sample {
    double t = 0.0;
    FullState state;
    Rates rates;
    StorageValues storage;
    PortPower power;
    PortEnergy energy;
    SamplePhase phase = SamplePhase::regular;
};

/// Recorded run of the hybrid flow. Times are non-decreasing; the only repeated
/// times are pre_event/post_event pairs.
struct Trajectory {
    std::size_t n = 0;
    std::size_t m = 0;
    std::size_t p = 0;
    bool driven = false;
    double rel_tol = 0.0;
    double event_tol = 0.0;
    std::vector<Sample> samples;
    SwitchLedger ledger;

    [[nodiscard]] const Sample& terminal() const;
};

/// Event root isolation failed, or switches accumulate without time advancing.
class EventIsolationError : public Error {
public:
    EventIsolationError(const std::string& what, double time, FullState state)
        : Error(what), time_(time), state_(std::move(state)) {}
    [[nodiscard]] double time() const { return time_; }
    [[nodiscard]] const FullState& state() const { return state_; }

private:
    double time_;
    FullState state_;
};

/// The state became non-finite or the step size underflowed.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, Sample last_valid)
        : Error(what), last_valid_(std::move(last_valid)) {}
    [[nodiscard]] const Sample& last_valid() const { return last_valid_; }

private:
    Sample last_valid_;
};

enum class WatchedEvent { none, activation, deactivation };

/// Per constraint: mu_i (activation root), g_i(x) (deactivation root), and which
/// of the two is monitored in the current mode.
struct EventFunction {
    double mu = 0.0;
    double g = 0.0;
    WatchedEvent watched = WatchedEvent::none;
};

[[nodiscard]] std::vector<EventFunction> event_functions(const ComposedSystem& sys, double t,
                                                         const FullState& state);

/// Build a consistent state at time t: clamps negative multipliers (throws
/// ContractViolation if one is below -1e-12), recomputes sigma and zeroes the
/// multipliers of its members. Driven systems take x = u~(t).
[[nodiscard]] FullState make_state(const ComposedSystem& sys, double t, Vector x, Vector lambda, Vector mu);

struct StepResult {
    FullState state;
    std::vector<SwitchEvent> events;
};

/// Advance by exactly dt with Dormand-Prince steps over the smooth field of the
/// current mode, cutting at every switch (located to opts.event_tol), applying it
/// and re-stepping the remainder.
[[nodiscard]] StepResult step(const ComposedSystem& sys, double t, const FullState& state, double dt,
                              const IntegratorOptions& opts);

/// Adaptive integration to opts.horizon, recording every record_stride and both
/// sides of each switch. Port energies are integrated with the state (outside
/// error control). Deterministic for fixed inputs.
[[nodiscard]] Trajectory simulate(const ComposedSystem& sys, const FullState& initial,
                                  const IntegratorOptions& opts);

/// Evaluate rates, storages and port powers of a state at time t.
[[nodiscard]] Sample make_sample(const ComposedSystem& sys, double t, const FullState& state,
                                 SamplePhase phase = SamplePhase::regular, const PortEnergy& energy = {});

}  // namespace pdflow
