#include "pdflow/artifacts.hpp"

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace pdflow::artifacts {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

const char* phase_name(SamplePhase phase) {
    switch (phase) {
        case SamplePhase::regular:
            return "regular";
        case SamplePhase::pre_event:
            return "pre_event";
        case SamplePhase::post_event:
            return "post_event";
    }
    return "regular";
}

SamplePhase parse_phase(const std::string& s) {
    if (s == "regular") {
        return SamplePhase::regular;
    }
    if (s == "pre_event") {
        return SamplePhase::pre_event;
    }
    if (s == "post_event") {
        return SamplePhase::post_event;
    }
    throw ArtifactError("unknown sample phase '" + s + "'");
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

double to_double(const std::string& s, std::size_t row) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) {
            throw std::invalid_argument(s);
        }
        return v;
    } catch (const std::exception&) {
        throw ArtifactError("row " + std::to_string(row) + ": not a number: '" + s + "'");
    }
}

std::size_t count_prefix(const std::vector<std::string>& header, const std::string& prefix) {
    std::size_t k = 0;
    for (const auto& h : header) {
        if (h.rfind(prefix, 0) == 0 && h.size() > prefix.size() &&
            std::isdigit(static_cast<unsigned char>(h[prefix.size()]))) {
            ++k;
        }
    }
    return k;
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    out << "t";
    for (std::size_t i = 1; i <= traj.n; ++i) {
        out << ",x" << i;
    }
    for (std::size_t i = 1; i <= traj.m; ++i) {
        out << ",lambda" << i;
    }
    for (std::size_t i = 1; i <= traj.p; ++i) {
        out << ",mu" << i;
    }
    out << ",sigma,P_tilde,S_sigma,S_tilde,P_eq,P_ineq,P_ext,E_eq,E_ineq,E_ext,phase\n";
    for (const auto& s : traj.samples) {
        out << fmt(s.t);
        for (const auto* v : {&s.state.x, &s.state.lambda, &s.state.mu}) {
            for (Eigen::Index i = 0; i < v->size(); ++i) {
                out << ',' << fmt((*v)(i));
            }
        }
        out << ',' << s.state.sigma.bitmask() << ',' << fmt(s.storage.p_tilde) << ',' << fmt(s.storage.s_sigma)
            << ',' << fmt(s.storage.s_tilde) << ',' << fmt(s.power.equality) << ',' << fmt(s.power.inequality)
            << ',' << fmt(s.power.external) << ',' << fmt(s.energy.equality) << ',' << fmt(s.energy.inequality)
            << ',' << fmt(s.energy.external) << ',' << phase_name(s.phase) << '\n';
    }
}

Trajectory read_trajectory_csv(std::istream& in, const TrajectoryMeta& meta) {
    std::string line;
    if (!std::getline(in, line)) {
        throw ArtifactError("trajectory CSV is empty");
    }
    const auto header = split(line);
    Trajectory traj;
    traj.n = count_prefix(header, "x");
    traj.m = count_prefix(header, "lambda");
    traj.p = count_prefix(header, "mu");
    traj.driven = meta.driven;
    traj.rel_tol = meta.rel_tol;
    traj.event_tol = meta.event_tol;
    const std::size_t cols = 1 + traj.n + traj.m + traj.p + 11;
    if (header.size() != cols || header.front() != "t" || header.back() != "phase") {
        throw ArtifactError("trajectory CSV header does not match the expected column layout");
    }
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) {
            continue;
        }
        const auto cells = split(line);
        if (cells.size() != cols) {
            throw ArtifactError("trajectory CSV row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                                " columns, expected " + std::to_string(cols));
        }
        Sample s;
        std::size_t c = 0;
        s.t = to_double(cells[c++], row);
        auto read_vec = [&](std::size_t k) {
            Vector v(static_cast<Eigen::Index>(k));
            for (std::size_t i = 0; i < k; ++i) {
                v(static_cast<Eigen::Index>(i)) = to_double(cells[c++], row);
            }
            return v;
        };
        s.state.x = read_vec(traj.n);
        s.state.lambda = read_vec(traj.m);
        s.state.mu = read_vec(traj.p);
        std::uint64_t mask = 0;
        try {
            mask = std::stoull(cells[c++]);
        } catch (const std::exception&) {
            throw ArtifactError("trajectory CSV row " + std::to_string(row) + ": bad sigma bitmask");
        }
        try {
            s.state.sigma = ActiveSet::from_bitmask(traj.p, mask);
        } catch (const Error& e) {
            throw ArtifactError("trajectory CSV row " + std::to_string(row) + ": " + e.what());
        }
        s.storage.p_tilde = to_double(cells[c++], row);
        s.storage.s_sigma = to_double(cells[c++], row);
        s.storage.s_tilde = to_double(cells[c++], row);
        s.power.equality = to_double(cells[c++], row);
        s.power.inequality = to_double(cells[c++], row);
        s.power.external = to_double(cells[c++], row);
        s.energy.equality = to_double(cells[c++], row);
        s.energy.inequality = to_double(cells[c++], row);
        s.energy.external = to_double(cells[c++], row);
        s.phase = parse_phase(cells[c++]);
        traj.samples.push_back(std::move(s));
    }
    if (traj.samples.empty()) {
        throw ArtifactError("trajectory CSV has no samples");
    }
    return traj;
}

void write_ledger_csv(std::ostream& out, const SwitchLedger& ledger) {
    out << "t,index,kind,S_before,S_after\n";
    for (const auto& ev : ledger) {
        out << fmt(ev.time) << ',' << ev.index + 1 << ',' << to_string(ev.kind) << ',' << fmt(ev.storage_before)
            << ',' << fmt(ev.storage_after) << '\n';
    }
}

SwitchLedger read_ledger_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "t,index,kind,S_before,S_after") {
        throw ArtifactError("ledger CSV header does not match the expected column layout");
    }
    SwitchLedger ledger;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) {
            continue;
        }
        const auto cells = split(line);
        if (cells.size() != 5) {
            throw ArtifactError("ledger CSV row " + std::to_string(row) + " does not have 5 columns");
        }
        SwitchEvent ev;
        ev.time = to_double(cells[0], row);
        const double index = to_double(cells[1], row);
        if (index < 1.0) {
            throw ArtifactError("ledger CSV row " + std::to_string(row) + ": index must be 1-based");
        }
        ev.index = static_cast<std::size_t>(index) - 1;
        if (cells[2] == "activation") {
            ev.kind = SwitchKind::activation;
        } else if (cells[2] == "deactivation") {
            ev.kind = SwitchKind::deactivation;
        } else {
            throw ArtifactError("ledger CSV row " + std::to_string(row) + ": unknown kind '" + cells[2] + "'");
        }
        ev.storage_before = to_double(cells[3], row);
        ev.storage_after = to_double(cells[4], row);
        ledger.push_back(ev);
    }
    return ledger;
}

void write_storage_csv(std::ostream& out, const Trajectory& traj) {
    out << "t,sigma,P_tilde,S_sigma,S_tilde,phase\n";
    for (const auto& s : traj.samples) {
        out << fmt(s.t) << ",\"" << s.state.sigma.to_string() << "\"," << fmt(s.storage.p_tilde) << ','
            << fmt(s.storage.s_sigma) << ',' << fmt(s.storage.s_tilde) << ',' << phase_name(s.phase) << '\n';
    }
}

std::string ledger_table(const Trajectory& traj) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof line, "%-26s %-28s %s\n", "t", "sigma(t)", "S_sigma(t)");
    out << line;
    if (traj.samples.empty()) {
        return out.str();
    }
    // Sequence of (start time, mode, storage at start) from the recorded samples.
    struct Row {
        double t;
        std::string sigma;
        double storage;
    };
    std::vector<Row> rows;
    rows.push_back({traj.samples.front().t, traj.samples.front().state.sigma.to_string(),
                    traj.samples.front().storage.s_sigma});
    for (const auto& s : traj.samples) {
        if (s.phase == SamplePhase::post_event) {
            rows.push_back({s.t, s.state.sigma.to_string(), s.storage.s_sigma});
        }
    }
    for (std::size_t k = 0; k < rows.size(); ++k) {
        char interval[64];
        if (k + 1 < rows.size()) {
            std::snprintf(interval, sizeof interval, "[%.6g, %.6g)", rows[k].t, rows[k + 1].t);
        } else {
            std::snprintf(interval, sizeof interval, "[%.6g, end]", rows[k].t);
        }
        std::snprintf(line, sizeof line, "%-26s %-28s %.10g\n", interval, rows[k].sigma.c_str(), rows[k].storage);
        out << line;
    }
    return out.str();
}

nlohmann::json oracle_json(const KktPoint& point, const KktResidual& residual) {
    auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    return nlohmann::json{
        {"x", vec(point.x_star)},
        {"lambda", vec(point.lambda_star)},
        {"mu", vec(point.mu_star)},
        {"residual",
         {{"stationarity", residual.stationarity},
          {"equality", residual.equality},
          {"inequality_violation", residual.inequality_violation},
          {"complementarity", residual.complementarity},
          {"dual_negativity", residual.dual_negativity}}},
    };
}

KktPoint read_oracle_json(const nlohmann::json& j) {
    auto vec = [&](const char* key) {
        if (!j.contains(key) || !j[key].is_array()) {
            throw ArtifactError(std::string("oracle JSON lacks array '") + key + "'");
        }
        const auto v = j[key].get<std::vector<double>>();
        return Vector(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
    };
    return KktPoint{vec("x"), vec("lambda"), vec("mu")};
}

void write_daily_report_csv(std::ostream& out, const hvac::DailyReport& report) {
    const auto N = report.segments.empty() ? 0 : report.segments.front().T.size();
    out << "interval,start_h,end_h,price,q";
    for (Eigen::Index i = 1; i <= N; ++i) {
        out << ",T" << i;
    }
    out << ",cooling_load,objective,settling_time\n";
    for (const auto& s : report.segments) {
        out << s.interval << ',' << fmt(s.start_h) << ',' << fmt(s.end_h) << ',' << fmt(s.price) << ',' << fmt(s.q);
        for (Eigen::Index i = 0; i < s.T.size(); ++i) {
            out << ',' << fmt(s.T(i));
        }
        out << ',' << fmt(s.cooling_load) << ',' << fmt(s.objective) << ',' << fmt(s.settling_time) << '\n';
    }
}

}  // namespace pdflow::artifacts
