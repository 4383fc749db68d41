// pdflow: simulate, verify and report on primal-dual flows.

#include "pdflow/artifacts.hpp"
#include "pdflow/hvac.hpp"
#include "pdflow/integrator.hpp"
#include "pdflow/monitor.hpp"
#include "pdflow/random_instances.hpp"
#include "pdflow/scenario.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

namespace fs = std::filesystem;
using namespace pdflow;

namespace {

enum Exit { kOk = 0, kValidation = 1, kDivergence = 2, kCertificate = 3 };

struct Overrides {
    std::string scenario;
    std::string out;
    std::optional<double> horizon;
    std::optional<double> dt_max;
    std::uint64_t seed = 1;
};

std::string vec_str(const Vector& v) {
    std::ostringstream s;
    s << '[';
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.10g", v(i));
        s << (i ? ", " : "") << buf;
    }
    s << ']';
    return s.str();
}

scenario::Scenario load(const Overrides& o) {
    auto s = scenario::load_scenario(o.scenario);
    if (o.horizon) {
        s.integrator.horizon = *o.horizon;
    }
    if (o.dt_max) {
        s.integrator.dt_max = *o.dt_max;
        s.integrator.dt_init = std::min(s.integrator.dt_init, *o.dt_max);
    }
    try {
        s.integrator.validate();
    } catch (const ContractViolation& e) {
        throw scenario::ParseError("<command line>", 0, 0, "integrator", e.what());
    }
    return s;
}

fs::path out_dir(const Overrides& o, const scenario::Scenario& s) {
    fs::path dir = o.out.empty() ? fs::path(s.outputs.directory) : fs::path(o.out);
    fs::create_directories(dir);
    return dir;
}

template <typename Fn>
void write_file(const fs::path& path, Fn&& fn) {
    std::ofstream out(path);
    if (!out) {
        throw artifacts::ArtifactError("cannot write " + path.string());
    }
    fn(out);
}

void dump_state(std::ostream& out, const FullState& s) {
    out << "  x = " << vec_str(s.x) << "\n  lambda = " << vec_str(s.lambda) << "\n  mu = " << vec_str(s.mu)
        << "\n  sigma = " << s.sigma.to_string() << '\n';
}

int cmd_simulate(const Overrides& o) {
    const auto s = load(o);
    const auto dir = out_dir(o, s);
    const auto sys = s.build_system();
    std::optional<KktPoint> oracle;
    if (s.kind != scenario::Kind::driven) {
        const auto problem = s.build_problem();
        oracle = active_set_oracle(*problem);
        write_file(dir / "oracle.json", [&](std::ostream& out) {
            out << artifacts::oracle_json(*oracle, kkt_residual(*problem, *oracle)).dump(2) << '\n';
        });
    } else {
        fs::remove(dir / "oracle.json");
    }
    write_file(dir / "manifest.json", [&](std::ostream& out) { out << scenario::to_manifest(s).dump(2) << '\n'; });

    Trajectory traj;
    try {
        traj = simulate(sys, s.initial_state(sys), s.integrator);
    } catch (const DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\nlast valid state at t = " << e.last_valid().t << ":\n";
        dump_state(std::cerr, e.last_valid().state);
        return kDivergence;
    } catch (const EventIsolationError& e) {
        std::cerr << "error: " << e.what() << "\nstate at t = " << e.time() << ":\n";
        dump_state(std::cerr, e.state());
        return kDivergence;
    }

    write_file(dir / "trajectory.csv", [&](std::ostream& out) { artifacts::write_trajectory_csv(out, traj); });
    write_file(dir / "ledger.csv", [&](std::ostream& out) { artifacts::write_ledger_csv(out, traj.ledger); });
    write_file(dir / "storage.csv", [&](std::ostream& out) { artifacts::write_storage_csv(out, traj); });
    write_file(dir / "switching.txt", [&](std::ostream& out) { out << artifacts::ledger_table(traj); });

    const auto& end = traj.terminal();
    std::cout << "simulated " << (s.name.empty() ? o.scenario : s.name) << ": " << traj.samples.size()
              << " samples, " << traj.ledger.size() << " switch events\n"
              << "endpoint t = " << end.t << '\n';
    dump_state(std::cout, end.state);
    if (oracle) {
        std::cout << "oracle x* = " << vec_str(oracle->x_star) << '\n';
    }
    std::cout << "artifacts written to " << dir.string() << '\n';
    return kOk;
}

int cmd_verify(const std::string& dir_arg) {
    const fs::path dir(dir_arg);
    for (const char* f : {"manifest.json", "trajectory.csv", "ledger.csv"}) {
        if (!fs::exists(dir / f)) {
            throw artifacts::ArtifactError("missing artifact " + (dir / f).string());
        }
    }
    std::ifstream mf(dir / "manifest.json");
    std::stringstream mtext;
    mtext << mf.rdbuf();
    const auto s = scenario::parse_scenario(mtext.str(), (dir / "manifest.json").string());

    artifacts::TrajectoryMeta meta{s.kind == scenario::Kind::driven, s.integrator.rel_tol, s.integrator.event_tol};
    std::ifstream tf(dir / "trajectory.csv");
    auto traj = artifacts::read_trajectory_csv(tf, meta);
    std::ifstream lf(dir / "ledger.csv");
    traj.ledger = artifacts::read_ledger_csv(lf);
    if (traj.n != s.n() || traj.m != s.m() || traj.p != s.p()) {
        throw artifacts::ArtifactError("trajectory dimensions do not match the manifest");
    }

    std::vector<CertificateReport> reports;
    for (const auto& name : s.outputs.certificates) {
        if (name == "unforced_decrease") {
            reports.push_back(check_unforced_decrease(traj));
        } else if (name == "hybrid_passivity") {
            reports.push_back(check_hybrid_passivity_all(traj));
        } else if (name == "switch_ledger") {
            reports.push_back(check_switch_ledger(traj));
        } else if (name == "quadratic_norm") {
            CertificateReport r;
            r.name = name;
            r.outcome = Outcome::not_applicable;
            r.detail = "requires a driven scenario with constant input";
            if (s.kind == scenario::Kind::driven && s.driven->is_constant()) {
                const auto sys = s.build_system();
                const Vector g = sys.proj().constraints().inequality(traj.samples.front().state.x);
                Vector mu_bar = traj.samples.front().state.mu;
                bool ok = true;
                for (Eigen::Index i = 0; i < g.size(); ++i) {
                    if (g(i) < 0.0) {
                        mu_bar(i) = 0.0;
                    } else if (g(i) > 0.0) {
                        ok = false;
                    }
                }
                if (ok) {
                    r = check_quadratic_norm(traj, sys.proj(), mu_bar);
                } else {
                    r.detail = "constant input violates a constraint; no equilibrium";
                }
            }
            reports.push_back(r);
        } else if (name == "convergence") {
            if (s.kind != scenario::Kind::driven && fs::exists(dir / "oracle.json")) {
                std::ifstream of(dir / "oracle.json");
                nlohmann::json oj;
                try {
                    oj = nlohmann::json::parse(of);
                } catch (const nlohmann::json::exception& e) {
                    throw artifacts::ArtifactError(std::string("corrupt oracle.json: ") + e.what());
                }
                reports.push_back(check_convergence(traj, *s.build_problem(), artifacts::read_oracle_json(oj)).report);
            } else {
                CertificateReport r;
                r.name = name;
                r.outcome = Outcome::not_applicable;
                r.detail = "no oracle available";
                reports.push_back(r);
            }
        }
    }
    write_file(dir / "report.json", [&](std::ostream& out) { out << to_json(reports).dump(2) << '\n'; });
    const auto table = to_table(reports);
    write_file(dir / "report.txt", [&](std::ostream& out) { out << table; });
    std::cout << table;
    return any_failed(reports) ? kCertificate : kOk;
}

int cmd_oracle(const Overrides& o) {
    const auto s = load(o);
    if (s.kind == scenario::Kind::driven) {
        throw scenario::ParseError(o.scenario, 0, 0, "driven", "driven scenarios have no optimization problem");
    }
    const auto problem = s.build_problem();
    const auto point = active_set_oracle(*problem);
    const auto res = kkt_residual(*problem, point);
    std::cout << "x*      = " << vec_str(point.x_star) << "\nlambda* = " << vec_str(point.lambda_star)
              << "\nmu*     = " << vec_str(point.mu_star) << "\nKKT residual = " << res.max() << '\n';
    const auto dir = out_dir(o, s);
    write_file(dir / "oracle.json",
               [&](std::ostream& out) { out << artifacts::oracle_json(point, res).dump(2) << '\n'; });
    return kOk;
}

int cmd_hvac_day(const Overrides& o) {
    const auto s = load(o);
    if (s.kind != scenario::Kind::hvac) {
        throw scenario::ParseError(o.scenario, 0, 0, "hvac", "hvac-day needs an hvac scenario");
    }
    const auto dir = out_dir(o, s);
    const auto& h = *s.hvac;
    hvac::TouOptions opts;
    opts.integrator = s.integrator;
    opts.chunk = h.chunk;
    opts.max_time_constants = h.max_time_constants;
    const auto dyn = s.hvac_dynamics();
    const auto sys = s.build_system();
    const auto init = hvac::HvacState::from_full(s.initial_state(sys));

    hvac::DailyReport tou;
    hvac::DailyReport flat;
    try {
        tou = hvac::run_tou_scenario(h.network, h.welfare, h.schedule, h.load, dyn, init, opts);
        opts.keep_trajectories = false;
        flat = hvac::run_tou_scenario(h.network, h.welfare, hvac::TouSchedule::flat(1.0), h.load, dyn, init, opts);
    } catch (const hvac::ScenarioError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kDivergence;
    } catch (const DivergenceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        dump_state(std::cerr, e.last_valid().state);
        return kDivergence;
    }
    write_file(dir / "daily_report.csv", [&](std::ostream& out) { artifacts::write_daily_report_csv(out, tou); });
    write_file(dir / "baseline_report.csv", [&](std::ostream& out) { artifacts::write_daily_report_csv(out, flat); });
    for (std::size_t k = 0; k < tou.segments.size(); ++k) {
        char name[64];
        std::snprintf(name, sizeof name, "segment_%02zu_ledger.csv", k);
        write_file(dir / name,
                   [&](std::ostream& out) { artifacts::write_ledger_csv(out, tou.segments[k].trajectory.ledger); });
    }
    write_file(dir / "manifest.json", [&](std::ostream& out) { out << scenario::to_manifest(s).dump(2) << '\n'; });
    const double reduction = flat.peak_q() - tou.peak_q();
    std::printf("%zu segments; peak q: baseline %.6g, TOU %.6g; peak load reduction %.6g\n", tou.segments.size(),
                flat.peak_q(), tou.peak_q(), reduction);
    return kOk;
}

int cmd_selftest(const Overrides& o) {
    std::mt19937_64 rng(o.seed);
    int failures = 0;
    const int count = 20;
    for (int k = 0; k < count; ++k) {
        const auto inst = random::random_qp(rng);
        const auto sys = inst.system();
        IntegratorOptions io;
        io.horizon = o.horizon.value_or(inst.horizon);
        if (o.dt_max) {
            io.dt_max = *o.dt_max;
            io.dt_init = std::min(io.dt_init, *o.dt_max);
        }
        io.record_stride = io.horizon / 200.0;
        const auto traj = simulate(sys, make_state(sys, 0.0, inst.x0, inst.lambda0, inst.mu0), io);
        const auto conv = check_convergence(traj, *inst.problem, inst.oracle);
        const auto ledger = check_switch_ledger(traj);
        const auto decrease = check_unforced_decrease(traj);
        const bool ok = conv.report.passed() && ledger.passed() && decrease.passed();
        failures += ok ? 0 : 1;
        std::printf("instance %2d (n=%zu m=%zu p=%zu): %s  %s\n", k, inst.problem->n(), inst.problem->m(),
                    inst.problem->p(), ok ? "PASS" : "FAIL", conv.report.detail.c_str());
    }
    std::printf("%d/%d instances passed\n", count - failures, count);
    return failures == 0 ? kOk : kCertificate;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Primal-dual gradient flow simulator with passivity certificates"};
    app.require_subcommand(1);
    Overrides o;
    std::string verify_dir;

    auto add_common = [&](CLI::App* sub, bool scenario_required) {
        auto* opt = sub->add_option("--scenario", o.scenario, "scenario file (JSON)");
        if (scenario_required) {
            opt->required()->check(CLI::ExistingFile);
        }
        sub->add_option("--out", o.out, "output directory");
        sub->add_option("--horizon", o.horizon, "override integrator horizon");
        sub->add_option("--dt-max", o.dt_max, "override maximum step");
        sub->add_option("--seed", o.seed, "seed for randomized suites");
    };
    auto* sim = app.add_subcommand("simulate", "integrate a scenario and write trajectory artifacts");
    add_common(sim, true);
    auto* ver = app.add_subcommand("verify", "check certificates over simulate artifacts");
    ver->add_option("dir", verify_dir, "artifact directory");
    ver->add_option("--out", o.out, "artifact directory (alternative to the positional argument)");
    auto* orc = app.add_subcommand("oracle", "solve the KKT system by active-set enumeration");
    add_common(orc, true);
    auto* day = app.add_subcommand("hvac-day", "run a 24 h TOU scenario against a flat-price baseline");
    add_common(day, true);
    auto* self = app.add_subcommand("selftest", "randomized oracle-equivalence check");
    add_common(self, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kValidation;
    }

    try {
        if (sim->parsed()) {
            return cmd_simulate(o);
        }
        if (ver->parsed()) {
            const std::string dir = verify_dir.empty() ? o.out : verify_dir;
            if (dir.empty()) {
                std::cerr << "error: verify needs an artifact directory\n";
                return kValidation;
            }
            return cmd_verify(dir);
        }
        if (orc->parsed()) {
            return cmd_oracle(o);
        }
        if (day->parsed()) {
            return cmd_hvac_day(o);
        }
        return cmd_selftest(o);
    } catch (const scenario::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
    } catch (const InfeasibleProblem& e) {
        std::cerr << "error: infeasible problem: " << e.what() << '\n';
    } catch (const CapabilityError& e) {
        std::cerr << "error: " << e.what() << '\n';
    } catch (const artifacts::ArtifactError& e) {
        std::cerr << "error: " << e.what() << '\n';
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
    }
    return kValidation;
}
