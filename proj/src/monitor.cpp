#include "pdflow/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

namespace pdflow {

namespace {

constexpr const char* kUnforced = "unforced_decrease";
constexpr const char* kPassivity = "hybrid_passivity";
constexpr const char* kLedger = "switch_ledger";
constexpr const char* kQuadratic = "quadratic_norm";
constexpr const char* kConvergence = "convergence";

CertificateReport make_report(const char* name, double tolerance) {
    CertificateReport r;
    r.name = name;
    r.tolerance = tolerance;
    r.worst_violation = -std::numeric_limits<double>::infinity();
    return r;
}

void note(CertificateReport& r, double violation, double t) {
    if (violation > r.worst_violation) {
        r.worst_violation = violation;
        r.location = {t};
    }
}

void finish(CertificateReport& r) {
    if (!std::isfinite(r.worst_violation) && r.worst_violation < 0.0) {
        r.worst_violation = 0.0;
    }
    r.outcome = r.worst_violation <= r.tolerance ? Outcome::passed : Outcome::failed;
}

CertificateReport not_applicable(const char* name, std::string why) {
    CertificateReport r;
    r.name = name;
    r.outcome = Outcome::not_applicable;
    r.detail = std::move(why);
    return r;
}

/// Port energy delivered over samples [a, b], from the integrated accumulators.
double port_energy(const std::vector<Sample>& s, std::size_t a, std::size_t b) {
    return s[b].energy.inequality - s[a].energy.inequality;
}

std::string mode_key(const ActiveSet& s) { return s.to_string(); }

}  // namespace

const char* to_string(Outcome outcome) {
    switch (outcome) {
        case Outcome::passed:
            return "passed";
        case Outcome::failed:
            return "failed";
        case Outcome::not_applicable:
            return "not_applicable";
        case Outcome::inconclusive:
            return "inconclusive";
    }
    return "unknown";
}

double integration_budget(const Trajectory& traj, double scale) {
    return std::max(1e-8, 10.0 * traj.rel_tol * std::abs(scale));
}

CertificateReport check_unforced_decrease(const Trajectory& traj, std::optional<double> tolerance) {
    if (traj.driven) {
        return not_applicable(kUnforced, "driven trajectory has no equality subsystem");
    }
    const auto& s = traj.samples;
    auto signal = [&](const Sample& sample) {
        return traj.p == 0 ? sample.storage.p_tilde : sample.storage.s_tilde;
    };
    double scale = 0.0;
    for (const auto& sample : s) {
        scale = std::max(scale, std::abs(signal(sample)));
    }
    auto r = make_report(kUnforced, tolerance.value_or(integration_budget(traj, scale)));
    r.detail = traj.p == 0 ? "P_tilde" : "S_tilde";
    for (std::size_t k = 1; k < s.size(); ++k) {
        note(r, signal(s[k]) - signal(s[k - 1]), s[k].t);
    }
    finish(r);
    return r;
}

CertificateReport check_hybrid_passivity(const Trajectory& traj, const ActiveSet& sigma_p,
                                         std::optional<double> tolerance) {
    if (traj.p == 0) {
        return not_applicable(kPassivity, "no inequality constraints");
    }
    if (sigma_p.universe() != traj.p) {
        throw ContractViolation("check_hybrid_passivity: mode universe does not match p");
    }
    const auto& s = traj.samples;
    double scale = 0.0;
    for (const auto& sample : s) {
        scale = std::max({scale, std::abs(sample.storage.s_sigma), std::abs(sample.energy.inequality)});
    }
    auto r = make_report(kPassivity, tolerance.value_or(integration_budget(traj, scale)));
    r.detail = "mode " + sigma_p.to_string();

    if (traj.ledger.empty()) {
        if (s.empty() || !(s.front().state.sigma == sigma_p)) {
            return not_applicable(kPassivity, "mode " + sigma_p.to_string() + " never visited");
        }
        for (std::size_t k = 1; k < s.size(); ++k) {
            note(r, s[k].storage.s_sigma - s.front().storage.s_sigma - port_energy(s, 0, k), s[k].t);
        }
        finish(r);
        r.detail += " (single mode)";
        return r;
    }

    std::vector<std::size_t> starts;
    for (std::size_t k = 0; k < s.size(); ++k) {
        const bool here = s[k].state.sigma == sigma_p;
        const bool before = k > 0 && s[k - 1].state.sigma == sigma_p;
        if (here && !before) {
            starts.push_back(k);
        }
    }
    if (starts.size() < 2) {
        return not_applicable(kPassivity, "mode " + sigma_p.to_string() + " not revisited");
    }
    for (std::size_t v = 0; v + 1 < starts.size(); ++v) {
        const std::size_t i = starts[v];
        const std::size_t j = starts[v + 1];
        const double lhs = s[j].storage.s_sigma - s[i].storage.s_sigma;
        const double violation = lhs - port_energy(s, i, j);
        if (violation > r.worst_violation) {
            r.worst_violation = violation;
            r.location = {s[i].t, s[j].t};
        }
    }
    finish(r);
    r.detail += ", " + std::to_string(starts.size() - 1) + " revisit pair(s)";
    return r;
}

CertificateReport check_hybrid_passivity_all(const Trajectory& traj, std::optional<double> tolerance) {
    if (traj.p == 0) {
        return not_applicable(kPassivity, "no inequality constraints");
    }
    std::map<std::string, ActiveSet> modes;
    for (const auto& sample : traj.samples) {
        modes.emplace(mode_key(sample.state.sigma), sample.state.sigma);
    }
    CertificateReport out = not_applicable(kPassivity, "no mode revisited");
    std::size_t applicable = 0;
    for (const auto& [key, mode] : modes) {
        auto r = check_hybrid_passivity(traj, mode, tolerance);
        if (r.outcome == Outcome::not_applicable) {
            continue;
        }
        ++applicable;
        if (out.outcome == Outcome::not_applicable || r.failed() ||
            (!out.failed() && r.worst_violation > out.worst_violation)) {
            out = r;
        }
    }
    if (applicable > 0) {
        out.detail = std::to_string(applicable) + " mode(s) checked; worst " + out.detail;
    }
    return out;
}

CertificateReport check_switch_ledger(const Trajectory& traj, std::optional<double> tolerance) {
    double scale = 1.0;
    for (const auto& ev : traj.ledger) {
        scale = std::max({scale, std::abs(ev.storage_before), std::abs(ev.storage_after)});
    }
    auto r = make_report(kLedger, tolerance.value_or(integration_budget(traj, scale)));
    std::size_t activations = 0;
    std::size_t deactivations = 0;
    for (const auto& ev : traj.ledger) {
        if (ev.kind == SwitchKind::activation) {
            ++activations;
            const double rise = ev.storage_after - ev.storage_before;
            // Strictness: a non-negative change counts as a violation of at least the tolerance.
            note(r, rise >= 0.0 ? std::max(rise, r.tolerance * 2.0) : rise, ev.time);
        } else {
            ++deactivations;
            note(r, std::abs(ev.storage_after - ev.storage_before), ev.time);
        }
    }
    for (std::size_t k = 1; k < traj.ledger.size(); ++k) {
        if (traj.ledger[k].time < traj.ledger[k - 1].time) {
            note(r, std::numeric_limits<double>::infinity(), traj.ledger[k].time);
        }
    }
    finish(r);
    r.detail = std::to_string(activations) + " activation(s), " + std::to_string(deactivations) +
               " deactivation(s)";
    return r;
}

CertificateReport check_quadratic_norm(const Trajectory& traj, const ProjectionSystem& sys, const Vector& mu_bar,
                                       std::optional<double> tolerance) {
    require_size(mu_bar, static_cast<Eigen::Index>(sys.p()), "mu_bar");
    if (traj.samples.empty()) {
        throw ContractViolation("check_quadratic_norm: empty trajectory");
    }
    const Vector u_star = traj.samples.front().state.x;
    const Vector g = sys.constraints().inequality(u_star);
    const double pre_tol = 1e-9 * std::max(1.0, max_norm(g));
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        if (g(i) > pre_tol || mu_bar(i) < 0.0 || std::abs(mu_bar(i) * g(i)) > pre_tol) {
            throw PreconditionError("mu_bar is not an equilibrium of the projection dynamics (constraint " +
                                    std::to_string(i + 1) + ")");
        }
    }
    auto v_of = [&](const Vector& mu) {
        const Vector d = mu - mu_bar;
        return 0.5 * d.dot(sys.tau_mu().cwiseProduct(d));
    };
    std::vector<double> v;
    v.reserve(traj.samples.size());
    double scale = 0.0;
    for (const auto& sample : traj.samples) {
        v.push_back(v_of(sample.state.mu));
        scale = std::max(scale, v.back());
    }
    auto r = make_report(kQuadratic, tolerance.value_or(integration_budget(traj, scale)));
    for (std::size_t k = 1; k < v.size(); ++k) {
        note(r, v[k] - v[k - 1], traj.samples[k].t);
    }
    finish(r);
    return r;
}

ConvergenceReport check_convergence(const Trajectory& traj, const ConvexProblem& problem, const KktPoint& oracle,
                                    ConvergenceTolerances tol) {
    if (traj.samples.empty()) {
        throw ContractViolation("check_convergence: empty trajectory");
    }
    require_size(oracle.x_star, static_cast<Eigen::Index>(problem.n()), "oracle x");
    const bool compare_lambda = problem.p() == 0 && problem.m() > 0;
    auto error = [&](const Sample& s) {
        double e = max_norm(s.state.x - oracle.x_star);
        if (compare_lambda) {
            e = std::max(e, max_norm(s.state.lambda - oracle.lambda_star));
        }
        return e;
    };

    ConvergenceReport out;
    auto& r = out.report;
    r.name = kConvergence;
    r.tolerance = 1.0;
    const auto& last = traj.terminal();
    const double e = error(last);
    const double kkt = kkt_residual(problem, KktPoint{last.state.x, last.state.lambda, last.state.mu}).max();
    r.worst_violation = std::max(e / tol.x, kkt / tol.kkt);
    r.location = {last.t};

    std::size_t k = traj.samples.size();
    while (k > 0 && error(traj.samples[k - 1]) <= tol.x) {
        --k;
    }
    if (k == 0) {
        out.settling_time = traj.samples.front().t;
    } else if (k < traj.samples.size()) {
        out.settling_time = traj.samples[k].t;
    }

    std::ostringstream detail;
    detail << "x error " << e << " (tol " << tol.x << "), KKT residual " << kkt << " (tol " << tol.kkt << ")";
    if (out.settling_time) {
        detail << ", settled at t = " << *out.settling_time;
    }
    r.detail = detail.str();

    if (r.worst_violation <= r.tolerance) {
        r.outcome = Outcome::passed;
        return out;
    }
    // Still contracting at the horizon: the run was too short to decide.
    const double t_probe = last.t - 0.1 * (last.t - traj.samples.front().t);
    std::size_t probe = 0;
    while (probe + 1 < traj.samples.size() && traj.samples[probe + 1].t <= t_probe) {
        ++probe;
    }
    const double earlier = error(traj.samples[probe]);
    r.outcome = (probe + 1 < traj.samples.size() && e < 0.9 * earlier) ? Outcome::inconclusive : Outcome::failed;
    return out;
}

bool any_failed(const std::vector<CertificateReport>& reports) {
    return std::any_of(reports.begin(), reports.end(), [](const auto& r) { return r.failed(); });
}

nlohmann::json to_json(const CertificateReport& report) {
    nlohmann::json j;
    j["name"] = report.name;
    j["outcome"] = to_string(report.outcome);
    j["passed"] = report.passed();
    j["worst_violation"] = report.worst_violation;
    j["location"] = report.location;
    j["tolerance"] = report.tolerance;
    j["detail"] = report.detail;
    return j;
}

nlohmann::json to_json(const std::vector<CertificateReport>& reports) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : reports) {
        j.push_back(to_json(r));
    }
    return j;
}

std::string to_table(const std::vector<CertificateReport>& reports) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof line, "%-20s %-15s %-13s %-13s %s\n", "certificate", "outcome", "worst", "tolerance",
                  "detail");
    out << line;
    for (const auto& r : reports) {
        std::snprintf(line, sizeof line, "%-20s %-15s %-13.4e %-13.4e ", r.name.c_str(), to_string(r.outcome),
                      r.worst_violation, r.tolerance);
        out << line << r.detail << '\n';
    }
    return out.str();
}

}  // namespace pdflow
