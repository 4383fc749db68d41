#include "pdflow/hvac.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace pdflow::hvac {

namespace {

void require_positive(const Vector& v, const char* what) {
    if (v.size() > 0 && !(v.minCoeff() > 0.0)) {
        throw ContractViolation(std::string(what) + " must be strictly positive");
    }
}

}  // namespace

void ThermalNetwork::validate(bool allow_zero_theta) const {
    const auto n = static_cast<Eigen::Index>(N);
    if (N == 0) {
        throw ContractViolation("thermal network needs at least one zone");
    }
    require_size(C, n, "C");
    require_size(R_amb, n, "R_amb");
    require_size(d, n, "d");
    if (R_zone.rows() != n || R_zone.cols() != n) {
        throw ContractViolation("R_zone must be N x N");
    }
    if (!R_zone.isApprox(R_zone.transpose()) || R_zone.minCoeff() < 0.0) {
        throw ContractViolation("R_zone must be symmetric with nonnegative entries");
    }
    require_positive(R_amb, "R_amb");
    if (!(theta > 0.0) && !(allow_zero_theta && theta == 0.0)) {
        throw ContractViolation("theta must be positive");
    }
}

ThermalNetwork ThermalNetwork::reference(std::size_t N) {
    const auto n = static_cast<Eigen::Index>(N);
    ThermalNetwork net;
    net.N = N;
    net.C = Vector::Ones(n);
    net.R_zone = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; N > 1 && i < n; ++i) {
        const Eigen::Index j = (i + 1) % n;
        if (i != j) {
            net.R_zone(i, j) = 20.0;
            net.R_zone(j, i) = 20.0;
        }
    }
    net.R_amb = Vector::Constant(n, 11.5);
    net.T_inf = 30.0;
    net.d = Vector::Constant(n, 0.5);
    net.theta = 3.0;
    return net;
}

void WelfareParams::validate(std::size_t N) const {
    const auto n = static_cast<Eigen::Index>(N);
    require_size(gamma, n, "gamma");
    require_size(T_ref, n, "T_ref");
    require_size(b_util, n, "b_util");
    require_size(T_min, n, "T_min");
    require_size(T_max, n, "T_max");
    require_positive(gamma, "gamma");
    if (!(rho[0] > 0.0)) {
        throw ContractViolation("rho_1 must be positive");
    }
    if (!((T_max - T_min).minCoeff() > 0.0)) {
        throw ContractViolation("T_min must be below T_max in every zone");
    }
}

WelfareParams WelfareParams::reference(std::size_t N) {
    const auto n = static_cast<Eigen::Index>(N);
    WelfareParams p;
    p.gamma = Vector::Ones(n);
    p.T_ref = Vector::Constant(n, 20.5);
    p.b_util = Vector::Constant(n, 40.0);
    p.rho = {0.5, 0.0, 0.0};
    p.T_min = Vector::Constant(n, 18.0);
    p.T_max = Vector::Constant(n, 24.0);
    return p;
}

void TouSchedule::validate() const {
    if (prices.empty() || breakpoints.size() != prices.size() + 1) {
        throw ContractViolation("TOU schedule needs one more breakpoint than prices");
    }
    if (breakpoints.front() != 0.0 || breakpoints.back() != 24.0) {
        throw ContractViolation("TOU schedule must cover [0, 24] h without gaps");
    }
    for (std::size_t k = 1; k < breakpoints.size(); ++k) {
        if (!(breakpoints[k] > breakpoints[k - 1])) {
            throw ContractViolation("TOU breakpoints must be strictly increasing");
        }
    }
    for (const double p : prices) {
        if (!(p >= 0.0)) {
            throw ContractViolation("TOU prices must be nonnegative");
        }
    }
}

double TouSchedule::price_at(double hour) const {
    for (std::size_t k = 0; k < prices.size(); ++k) {
        if (hour < breakpoints[k + 1]) {
            return prices[k];
        }
    }
    return prices.back();
}

TouSchedule TouSchedule::flat(double price) { return TouSchedule{{0.0, 24.0}, {price}}; }

SteadyState steady_state_constraint(const ThermalNetwork& net) {
    net.validate(true);
    SteadyState out;
    out.A = (-net.theta * net.R_amb.cwiseInverse()).transpose();
    out.b = net.theta * ((net.T_inf * net.R_amb.cwiseInverse()).sum() + net.d.sum());
    return out;
}

ConvexProblem build_welfare_problem(const ThermalNetwork& net, const WelfareParams& params, double price) {
    net.validate();
    params.validate(net.N);
    if (!(price > 0.0)) {
        throw ContractViolation("price must be positive");
    }
    const auto N = static_cast<Eigen::Index>(net.N);
    const double rho1 = price * params.rho[0];
    const double rho2 = price * params.rho[1];

    QuadraticObjective obj;
    obj.H = Matrix::Zero(N + 1, N + 1);
    obj.H.diagonal().head(N) = 2.0 * params.gamma;
    obj.H(N, N) = 2.0 * rho1;
    obj.c = Vector::Zero(N + 1);
    obj.c.head(N) = -2.0 * params.gamma.cwiseProduct(params.T_ref);
    obj.c(N) = rho2;
    obj.constant = params.rho[2] - params.b_util.sum() +
                   params.gamma.dot(params.T_ref.cwiseProduct(params.T_ref));

    const auto ss = steady_state_constraint(net);
    Matrix A(1, N + 1);
    A.leftCols(N) = ss.A;
    A(0, N) = -1.0;
    Vector b(1);
    b(0) = ss.b;

    Matrix G = Matrix::Zero(2 * N, N + 1);
    G.topLeftCorner(N, N) = -Matrix::Identity(N, N);
    G.block(N, 0, N, N) = Matrix::Identity(N, N);
    Vector h(2 * N);
    h << params.T_min, -params.T_max;

    return ConvexProblem::quadratic(std::move(obj), std::move(A), std::move(b), std::move(G), std::move(h));
}

Dynamics Dynamics::unit(std::size_t N) {
    const auto n = static_cast<Eigen::Index>(N);
    return Dynamics{Vector::Ones(n), 1.0, 1.0, Vector::Ones(n), Vector::Ones(n)};
}

ComposedSystem make_system(std::shared_ptr<const ConvexProblem> problem, const Dynamics& dyn) {
    const auto N = dyn.tau_T.size();
    Vector tau_x(N + 1);
    tau_x << dyn.tau_T, dyn.tau_q;
    Vector tau_mu(2 * N);
    tau_mu << dyn.tau_mu_low, dyn.tau_mu_high;
    auto bm = BmSystem::with_diagonal(problem, tau_x, Vector::Constant(1, dyn.tau_lambda));
    ProjectionSystem proj(problem, tau_mu);
    return ComposedSystem(std::move(bm), std::move(proj));
}

FullState HvacState::to_full(const ComposedSystem& sys) const {
    const auto N = T.size();
    Vector x(N + 1);
    x << T, q;
    Vector mu(2 * N);
    mu << mu_low, mu_high;
    return make_state(sys, 0.0, std::move(x), Vector::Constant(1, lambda), std::move(mu));
}

HvacState HvacState::from_full(const FullState& s) {
    const auto N = s.x.size() - 1;
    HvacState out;
    out.T = s.x.head(N);
    out.q = s.x(N);
    out.lambda = s.lambda(0);
    out.mu_low = s.mu.head(N);
    out.mu_high = s.mu.tail(N);
    return out;
}

HvacRates hvac_vector_field(const HvacState& state, const ComposedSystem& sys) {
    const auto N = state.T.size();
    Vector x(N + 1);
    x << state.T, state.q;
    Vector mu(2 * N);
    mu << state.mu_low, state.mu_high;
    FullState full{x, Vector::Constant(1, state.lambda), mu, ActiveSet(static_cast<std::size_t>(2 * N))};
    full.sigma = compute_sigma(mu, sys.proj().constraints().inequality(x));
    const Rates r = composed_vector_field(sys, full, Vector::Zero(N + 1));
    HvacRates out;
    out.T_dot = r.x_dot.head(N);
    out.q_dot = r.x_dot(N);
    out.lambda_dot = r.lambda_dot(0);
    out.mu_low_dot = r.mu_dot.head(N);
    out.mu_high_dot = r.mu_dot.tail(N);
    return out;
}

Vector synth_internal_load(double hour, const Vector& base, double occupancy_peak, double solar_peak) {
    if (!(hour >= 0.0 && hour < 24.0)) {
        throw ContractViolation("hour must lie in [0, 24)");
    }
    constexpr double pi = std::numbers::pi;
    double occupancy = 0.0;
    if (hour >= 7.0 && hour < 8.0) {
        occupancy = 0.5 * (1.0 - std::cos(pi * (hour - 7.0)));
    } else if (hour >= 8.0 && hour <= 18.0) {
        occupancy = 1.0;
    } else if (hour > 18.0 && hour < 19.0) {
        occupancy = 0.5 * (1.0 + std::cos(pi * (hour - 18.0)));
    }
    const double solar = (hour > 6.0 && hour < 18.0) ? std::sin(pi * (hour - 6.0) / 12.0) : 0.0;
    return (base.array() + occupancy_peak * occupancy + solar_peak * solar).matrix();
}

double DailyReport::peak_q() const {
    double peak = -std::numeric_limits<double>::infinity();
    for (const auto& s : segments) {
        peak = std::max(peak, s.q);
    }
    return peak;
}

DailyReport run_tou_scenario(const ThermalNetwork& net, const WelfareParams& params, const TouSchedule& schedule,
                             const LoadProfile& load, const Dynamics& dyn, const HvacState& initial,
                             const TouOptions& opts) {
    schedule.validate();
    net.validate();
    params.validate(net.N);
    if (!(load.segment_hours > 0.0) || !(opts.chunk > 0.0) || !(opts.max_time_constants > 0.0)) {
        throw ContractViolation("segment length, chunk and settling cap must be positive");
    }
    DailyReport report;
    HvacState current = initial;
    for (std::size_t k = 0; k < schedule.intervals(); ++k) {
        const double a = schedule.breakpoints[k];
        const double b = schedule.breakpoints[k + 1];
        const auto pieces = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((b - a) / load.segment_hours - 1e-9)));
        for (std::size_t s = 0; s < pieces; ++s) {
            SegmentResult seg;
            seg.interval = k;
            seg.start_h = a + (b - a) * static_cast<double>(s) / static_cast<double>(pieces);
            seg.end_h = a + (b - a) * static_cast<double>(s + 1) / static_cast<double>(pieces);
            seg.price = schedule.prices[k];

            ThermalNetwork seg_net = net;
            seg_net.d = synth_internal_load(0.5 * (seg.start_h + seg.end_h), net.d, load.occupancy_peak, load.solar_peak);
            seg.d = seg_net.d;
            auto problem = std::make_shared<const ConvexProblem>(build_welfare_problem(seg_net, params, seg.price));
            seg.oracle = active_set_oracle(*problem);
            const auto sys = make_system(problem, dyn);
            const double cap = opts.max_time_constants / linearized_decay_rate(sys, seg.oracle);

            FullState state = current.to_full(sys);
            double elapsed = 0.0;
            bool settled = false;
            while (!settled) {
                if (elapsed >= cap) {
                    throw ScenarioError("interval " + std::to_string(k) + " did not settle within " +
                                            std::to_string(cap) + " time units",
                                        k);
                }
                IntegratorOptions io = opts.integrator;
                io.horizon = std::min(opts.chunk, cap - elapsed);
                auto traj = simulate(sys, state, io);
                const auto conv = check_convergence(traj, *problem, seg.oracle, opts.tolerances);
                if (conv.report.passed()) {
                    settled = true;
                    seg.settling_time = elapsed + conv.settling_time.value_or(traj.terminal().t);
                }
                state = traj.terminal().state;
                if (opts.keep_trajectories) {
                    const PortEnergy offset =
                        seg.trajectory.samples.empty() ? PortEnergy{} : seg.trajectory.samples.back().energy;
                    for (auto& sample : traj.samples) {
                        sample.t += elapsed;
                        sample.energy.equality += offset.equality;
                        sample.energy.inequality += offset.inequality;
                        sample.energy.external += offset.external;
                    }
                    for (auto& ev : traj.ledger) {
                        ev.time += elapsed;
                    }
                    if (seg.trajectory.samples.empty()) {
                        seg.trajectory = std::move(traj);
                    } else {
                        auto& dst = seg.trajectory;
                        dst.samples.insert(dst.samples.end(), traj.samples.begin() + 1, traj.samples.end());
                        dst.ledger.insert(dst.ledger.end(), traj.ledger.begin(), traj.ledger.end());
                    }
                }
                elapsed += io.horizon;
            }

            current = HvacState::from_full(state);
            const auto N = static_cast<Eigen::Index>(net.N);
            seg.T = state.x.head(N);
            seg.q = state.x(N);
            seg.lambda = state.lambda(0);
            seg.mu = state.mu;
            seg.cooling_load = seg.q / net.theta;
            seg.objective = problem->objective(state.x);
            report.segments.push_back(std::move(seg));
        }
    }
    return report;
}

}  // namespace pdflow::hvac
