#include "pdflow/integrator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <utility>

namespace pdflow {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr std::array<double, 7> kC{0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0};
constexpr std::array<std::array<double, 6>, 7> kA{{
    {0, 0, 0, 0, 0, 0},
    {1.0 / 5.0, 0, 0, 0, 0, 0},
    {3.0 / 40.0, 9.0 / 40.0, 0, 0, 0, 0},
    {44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0, 0, 0},
    {19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0, 0},
    {9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0},
    {35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0},
}};
constexpr std::array<double, 7> kB{35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0,
                                   11.0 / 84.0, 0.0};
// Fifth- minus fourth-order weights.
constexpr std::array<double, 7> kE{71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0,
                                   -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0};

constexpr int kMaxRootIterations = 200;
constexpr Eigen::Index kEnergySlots = 3;

class Engine {
public:
    Engine(const ComposedSystem& sys, const IntegratorOptions& opts)
        : sys_(sys), opts_(opts), n_(static_cast<Eigen::Index>(sys.n())),
          m_(static_cast<Eigen::Index>(sys.m())), p_(static_cast<Eigen::Index>(sys.p())) {}

    /// State followed by the three port-energy accumulators.
    [[nodiscard]] Vector pack(const FullState& s, const PortEnergy& e = {}) const {
        Vector y(n_ + m_ + p_ + kEnergySlots);
        y << s.x, s.lambda, s.mu, e.equality, e.inequality, e.external;
        return y;
    }

    [[nodiscard]] FullState unpack(const Vector& y, const ActiveSet& sigma, double t) const {
        FullState s;
        s.x = sys_.is_driven() ? sys_.drive(t) : Vector(y.head(n_));
        s.lambda = y.segment(n_, m_);
        s.mu = y.segment(n_ + m_, p_);
        s.sigma = sigma;
        return s;
    }

    [[nodiscard]] static PortEnergy energy_of(const Vector& y) {
        const auto k = y.size() - kEnergySlots;
        return {y(k), y(k + 1), y(k + 2)};
    }

    [[nodiscard]] Vector field(double t, const Vector& y, const ActiveSet& sigma) const {
        const FullState s = unpack(y, sigma, t);
        const Rates r = sys_.rates(t, s);
        const PortPower pw = port_power(sys_, s, r, sys_.external_input_rate(t));
        Vector out(y.size());
        out << r.x_dot, r.lambda_dot, r.mu_dot, pw.equality, pw.inequality, pw.external;
        return out;
    }

    struct Trial {
        Vector y;
        double err = 0.0;
    };

    [[nodiscard]] Trial rk(double t, const Vector& y, double h, const ActiveSet& sigma, bool with_error) const {
        std::array<Vector, 7> k;
        for (std::size_t s = 0; s < 7; ++s) {
            Vector stage = y;
            for (std::size_t j = 0; j < s; ++j) {
                if (kA[s][j] != 0.0) {
                    stage.noalias() += (h * kA[s][j]) * k[j];
                }
            }
            if (s == 6) {
                // Stage 7 sits at the fifth-order solution; only needed for the error.
                if (!with_error) {
                    return Trial{std::move(stage), 0.0};
                }
                k[s] = field(t + h, stage, sigma);
                Trial out{std::move(stage), 0.0};
                Vector err = Vector::Zero(y.size());
                for (std::size_t j = 0; j < 7; ++j) {
                    if (kE[j] != 0.0) {
                        err.noalias() += (h * kE[j]) * k[j];
                    }
                }
                double worst = 0.0;
                for (Eigen::Index i = 0; i < y.size() - kEnergySlots; ++i) {
                    const double scale =
                        opts_.abs_tol + opts_.rel_tol * std::max(std::abs(y(i)), std::abs(out.y(i)));
                    worst = std::max(worst, std::abs(err(i)) / scale);
                }
                out.err = worst;
                return out;
            }
            k[s] = field(t + kC[s] * h, stage, sigma);
        }
        return {};  // unreachable
    }

    [[nodiscard]] Vector g_at(double t, const Vector& x) const {
        return sys_.proj().constraints().inequality(sys_.is_driven() ? sys_.drive(t) : x);
    }

    /// >= 0 before the switch, < 0 after it.
    [[nodiscard]] double event_value(std::size_t i, bool in_sigma, double t, const Vector& y) const {
        const auto k = static_cast<Eigen::Index>(i);
        if (!in_sigma) {
            return y(n_ + m_ + k);
        }
        const Vector x = sys_.is_driven() ? sys_.drive(t) : Vector(y.head(n_));
        return -sys_.proj().constraints().inequality(i, x);
    }

    [[nodiscard]] std::vector<std::size_t> crossings(double t_end, const Vector& y_end,
                                                     const ActiveSet& sigma) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < static_cast<std::size_t>(p_); ++i) {
            if (event_value(i, sigma.contains(i), t_end, y_end) < 0.0) {
                out.push_back(i);
            }
        }
        return out;
    }

    /// Smallest sub-step h' in (0, h] at which constraint i's event function is
    /// within event_tol of its root on the post-switch side.
    [[nodiscard]] double locate(std::size_t i, double t, const Vector& y0, double h, double phi_end,
                                const ActiveSet& sigma) const {
        const bool in_sigma = sigma.contains(i);
        auto phi = [&](double hh) { return event_value(i, in_sigma, t + hh, rk(t, y0, hh, sigma, false).y); };

        double a = 0.0;
        double fa = event_value(i, in_sigma, t, y0);
        double b = h;
        double fb = phi_end;
        int side = 0;
        const double resolution = 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
        for (int iter = 0; iter < kMaxRootIterations; ++iter) {
            if (-fb <= opts_.event_tol || b - a <= resolution) {
                return b;
            }
            double c = (fa != fb) ? (a * fb - b * fa) / (fb - fa) : 0.5 * (a + b);
            if (!(c > a && c < b)) {
                c = 0.5 * (a + b);
            }
            const double fc = phi(c);
            if (fc < 0.0) {
                b = c;
                fb = fc;
                if (side == -1) {
                    fa *= 0.5;
                }
                side = -1;
            } else {
                a = c;
                fa = fc;
                if (side == +1) {
                    fb *= 0.5;
                }
                side = +1;
            }
        }
        throw EventIsolationError("could not isolate switch of constraint " + std::to_string(i + 1), t,
                                  unpack(y0, sigma, t));
    }

    /// Clamp float dust on the multipliers, recompute sigma from scratch and
    /// classify any change. Returns the events (empty when sigma is unchanged).
    [[nodiscard]] std::vector<SwitchEvent> settle(double t, FullState& s) const {
        const double clamp_tol = std::max(1e-9, 100.0 * opts_.event_tol);
        for (Eigen::Index i = 0; i < p_; ++i) {
            if (s.mu(i) < 0.0) {
                if (s.mu(i) < -clamp_tol) {
                    throw EventIsolationError("multiplier " + std::to_string(i + 1) +
                                                  " overshot zero by " + std::to_string(-s.mu(i)),
                                              t, s);
                }
                s.mu(i) = 0.0;
            }
        }
        if (p_ == 0) {
            return {};
        }
        const Vector g = g_at(t, s.x);
        ActiveSet next = compute_sigma(s.mu, g);
        for (const auto i : next.indices()) {
            s.mu(static_cast<Eigen::Index>(i)) = 0.0;
        }
        if (next == s.sigma) {
            return {};
        }
        auto events = classify_switch(sys_.proj(), s.sigma, next, s.mu, g, t);
        s.sigma = std::move(next);
        return events;
    }

    /// Tracks switches that pile up at one instant.
    void guard_zeno(double t, const FullState& s) {
        if (t - last_switch_time_ <= opts_.dt_min) {
            if (++switches_at_instant_ > 2 * static_cast<int>(p_) + 4) {
                throw EventIsolationError("switches accumulate without time advancing (step underflow)", t, s);
            }
        } else {
            switches_at_instant_ = 0;
        }
        last_switch_time_ = t;
    }

    /// Earliest switch inside an accepted step, if any: sub-step length and state there.
    struct Located {
        double h = 0.0;
        Vector y;
    };

    [[nodiscard]] std::optional<Located> first_switch(double t, const Vector& y0, double h, double t_end,
                                                      const Vector& y_end, const ActiveSet& sigma) const {
        const auto crossing = crossings(t_end, y_end, sigma);
        if (crossing.empty()) {
            return std::nullopt;
        }
        double h_event = h;
        for (const auto i : crossing) {
            const double phi_end = event_value(i, sigma.contains(i), t_end, y_end);
            h_event = std::min(h_event, locate(i, t, y0, h, phi_end, sigma));
        }
        Located out;
        out.h = h_event;
        out.y = (h_event == h) ? y_end : rk(t, y0, h_event, sigma, false).y;
        return out;
    }

private:
    const ComposedSystem& sys_;
    const IntegratorOptions& opts_;
    Eigen::Index n_;
    Eigen::Index m_;
    Eigen::Index p_;
    double last_switch_time_ = -std::numeric_limits<double>::infinity();
    int switches_at_instant_ = 0;
};

}  // namespace

void IntegratorOptions::validate() const {
    if (!(dt_min > 0.0) || !(dt_min <= dt_init) || !(dt_init <= dt_max)) {
        throw ContractViolation("integrator options require 0 < dt_min <= dt_init <= dt_max");
    }
    if (!(event_tol > 0.0)) {
        throw ContractViolation("event_tol must be positive");
    }
    if (!(horizon >= 0.0) || !std::isfinite(horizon)) {
        throw ContractViolation("horizon must be finite and nonnegative");
    }
    if (!(record_stride > 0.0)) {
        throw ContractViolation("record_stride must be positive");
    }
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
        throw ContractViolation("error tolerances must be positive");
    }
}

const Sample& Trajectory::terminal() const {
    if (samples.empty()) {
        throw ContractViolation("trajectory has no samples");
    }
    return samples.back();
}

std::vector<EventFunction> event_functions(const ComposedSystem& sys, double t, const FullState& state) {
    const Vector x = sys.is_driven() ? sys.drive(t) : state.x;
    const Vector g = sys.proj().constraints().inequality(x);
    std::vector<EventFunction> out(sys.p());
    for (std::size_t i = 0; i < sys.p(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        out[i].mu = state.mu(k);
        out[i].g = g(k);
        if (state.sigma.contains(i)) {
            out[i].watched = WatchedEvent::deactivation;
        } else if (g(k) < 0.0) {
            out[i].watched = WatchedEvent::activation;
        }
    }
    return out;
}

FullState make_state(const ComposedSystem& sys, double t, Vector x, Vector lambda, Vector mu) {
    FullState s;
    s.x = sys.is_driven() ? sys.drive(t) : std::move(x);
    s.lambda = std::move(lambda);
    s.mu = std::move(mu);
    require_size(s.x, static_cast<Eigen::Index>(sys.n()), "initial x");
    require_size(s.lambda, static_cast<Eigen::Index>(sys.m()), "initial lambda");
    require_size(s.mu, static_cast<Eigen::Index>(sys.p()), "initial mu");
    for (Eigen::Index i = 0; i < s.mu.size(); ++i) {
        if (s.mu(i) < -1e-12) {
            throw ContractViolation("initial multipliers must be nonnegative");
        }
        s.mu(i) = std::max(0.0, s.mu(i));
    }
    const Vector g = sys.proj().constraints().inequality(s.x);
    s.sigma = compute_sigma(s.mu, g);
    for (const auto i : s.sigma.indices()) {
        s.mu(static_cast<Eigen::Index>(i)) = 0.0;
    }
    return s;
}

Sample make_sample(const ComposedSystem& sys, double t, const FullState& state, SamplePhase phase,
                   const PortEnergy& energy) {
    Sample sample;
    sample.t = t;
    sample.state = state;
    sample.rates = sys.rates(t, state);
    sample.storage = composite_storage(sys, state, sample.rates);
    sample.power = port_power(sys, state, sample.rates, sys.external_input_rate(t));
    sample.energy = energy;
    sample.phase = phase;
    return sample;
}

StepResult step(const ComposedSystem& sys, double t, const FullState& state, double dt,
                const IntegratorOptions& opts) {
    opts.validate();
    if (!(dt >= opts.dt_min) || dt > opts.dt_max) {
        throw ContractViolation("step: dt outside [dt_min, dt_max]");
    }
    Engine engine(sys, opts);
    StepResult result;
    FullState s = state;
    const double t_final = t + dt;
    double now = t;
    while (now < t_final) {
        const double h = t_final - now;
        const Vector y0 = engine.pack(s);
        const Vector y_end = engine.rk(now, y0, h, s.sigma, false).y;
        if (!y_end.allFinite()) {
            throw DivergenceError("non-finite state in step", make_sample(sys, now, s));
        }
        const auto hit = engine.first_switch(now, y0, h, t_final, y_end, s.sigma);
        if (!hit) {
            s = engine.unpack(y_end, s.sigma, t_final);
            now = t_final;
        } else {
            now = (hit->h == h) ? t_final : now + hit->h;
            s = engine.unpack(hit->y, s.sigma, now);
        }
        auto events = engine.settle(now, s);
        if (!events.empty()) {
            engine.guard_zeno(now, s);
            result.events.insert(result.events.end(), events.begin(), events.end());
        }
    }
    result.state = std::move(s);
    return result;
}

Trajectory simulate(const ComposedSystem& sys, const FullState& initial, const IntegratorOptions& opts) {
    opts.validate();
    Engine engine(sys, opts);

    Trajectory traj;
    traj.n = sys.n();
    traj.m = sys.m();
    traj.p = sys.p();
    traj.driven = sys.is_driven();
    traj.rel_tol = opts.rel_tol;
    traj.event_tol = opts.event_tol;

    FullState s = make_state(sys, 0.0, initial.x, initial.lambda, initial.mu);
    traj.samples.push_back(make_sample(sys, 0.0, s));
    PortEnergy energy;

    const double horizon = opts.horizon;
    const double time_eps = 1e-12 * std::max(1.0, horizon);
    double t = 0.0;
    double h = opts.adaptive ? opts.dt_init : opts.dt_max;
    std::size_t record_index = 1;
    auto next_record = [&] { return static_cast<double>(record_index) * opts.record_stride; };

    auto record_switch = [&](double at, const FullState& before, FullState& after) {
        auto events = engine.settle(at, after);
        if (events.empty()) {
            return false;
        }
        engine.guard_zeno(at, after);
        traj.samples.push_back(make_sample(sys, at, before, SamplePhase::pre_event, energy));
        traj.samples.push_back(make_sample(sys, at, after, SamplePhase::post_event, energy));
        traj.ledger.insert(traj.ledger.end(), events.begin(), events.end());
        return true;
    };

    while (horizon - t > time_eps) {
        const double target = std::min(next_record(), horizon);
        h = std::min({h, opts.dt_max, target - t});
        const bool reaches_target = t + h >= target - time_eps;

        const Vector y0 = engine.pack(s, energy);
        const auto trial = engine.rk(t, y0, h, s.sigma, opts.adaptive);
        if (!trial.y.allFinite()) {
            throw DivergenceError("state became non-finite at t = " + std::to_string(t), traj.samples.back());
        }
        if (opts.adaptive && trial.err > 1.0) {
            h *= std::max(0.2, 0.9 * std::pow(trial.err, -0.2));
            if (h < opts.dt_min) {
                throw DivergenceError("step size underflow at t = " + std::to_string(t), traj.samples.back());
            }
            continue;
        }

        const double t_end = reaches_target ? target : t + h;
        const auto hit = engine.first_switch(t, y0, h, t_end, trial.y, s.sigma);
        bool switched = false;
        if (hit) {
            const double t_event = (hit->h == h) ? t_end : t + hit->h;
            FullState before = engine.unpack(hit->y, s.sigma, t_event);
            energy = Engine::energy_of(hit->y);
            for (Eigen::Index i = 0; i < before.mu.size(); ++i) {
                before.mu(i) = std::max(0.0, before.mu(i));
            }
            FullState after = before;
            switched = record_switch(t_event, before, after);
            s = std::move(after);
            t = t_event;
        } else {
            t = t_end;
            FullState before = engine.unpack(trial.y, s.sigma, t);
            energy = Engine::energy_of(trial.y);
            FullState after = before;
            switched = record_switch(t, before, after);
            s = std::move(after);
        }

        if (t >= next_record() - time_eps || horizon - t <= time_eps) {
            if (!switched && traj.samples.back().t < t) {
                traj.samples.push_back(make_sample(sys, t, s, SamplePhase::regular, energy));
            }
            while (next_record() <= t + time_eps) {
                ++record_index;
            }
        }

        if (!hit) {
            if (opts.adaptive) {
                const double factor = trial.err > 0.0 ? 0.9 * std::pow(trial.err, -0.2) : 5.0;
                h *= std::clamp(factor, 0.2, 5.0);
            } else {
                h = opts.dt_max;
            }
        }
        h = std::max(h, opts.dt_min);
    }

    if (traj.samples.back().t < t) {
        traj.samples.push_back(make_sample(sys, t, s, SamplePhase::regular, energy));
    }
    return traj;
}

}  // namespace pdflow
