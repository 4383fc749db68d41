#include "pdflow/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

namespace pdflow::scenario {

using nlohmann::json;

namespace {

std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t offset) {
    offset = std::min(offset, text.size());
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < offset; ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> keys;
    std::string cur;
    for (const char ch : path) {
        if (ch == '.' || ch == '[') {
            if (!cur.empty()) {
                keys.push_back(cur);
            }
            cur.clear();
        } else if (ch != ']') {
            cur += ch;
        }
    }
    if (!cur.empty()) {
        keys.push_back(cur);
    }
    return keys;
}

class Reader {
public:
    Reader(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {}

    /// Best-effort anchor: the position of the last key of the path found in order.
    [[noreturn]] void fail(const std::string& path, const std::string& message) const {
        std::size_t pos = 0;
        std::size_t anchor = 0;
        for (const auto& key : split_path(path)) {
            if (std::all_of(key.begin(), key.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
                continue;
            }
            const auto found = text_.find("\"" + key + "\"", pos);
            if (found == std::string::npos) {
                break;
            }
            anchor = found;
            pos = found + key.size() + 2;
        }
        const auto [line, col] = line_col(text_, anchor);
        throw ParseError(source_, line, col, path, message);
    }

    const json* find(const json& obj, const std::string& path, const char* key) const {
        if (!obj.is_object()) {
            fail(path, "expected an object");
        }
        const auto it = obj.find(key);
        return it == obj.end() ? nullptr : &*it;
    }

    const json& require(const json& obj, const std::string& path, const char* key) const {
        const json* j = find(obj, path, key);
        if (j == nullptr) {
            fail(path, std::string("missing required key '") + key + "'");
        }
        return *j;
    }

    void allow_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) const {
        if (!obj.is_object()) {
            fail(path, "expected an object");
        }
        std::set<std::string> allowed(keys.begin(), keys.end());
        for (const auto& [k, v] : obj.items()) {
            if (allowed.count(k) == 0) {
                fail(join(path, k), "unknown key '" + k + "'");
            }
        }
    }

    double number(const json& j, const std::string& path) const {
        if (!j.is_number()) {
            fail(path, "expected a number");
        }
        const double v = j.get<double>();
        if (!std::isfinite(v)) {
            fail(path, "expected a finite number");
        }
        return v;
    }

    double number_or(const json& obj, const std::string& path, const char* key, double fallback) const {
        const json* j = find(obj, path, key);
        return j == nullptr ? fallback : number(*j, join(path, key));
    }

    /// Array, or scalar replicated to `size` when the size is known.
    Vector vector(const json& j, const std::string& path, std::optional<Eigen::Index> size) const {
        if (j.is_number()) {
            if (!size) {
                fail(path, "scalar given where the length is not yet known; use an array");
            }
            return Vector::Constant(*size, number(j, path));
        }
        if (!j.is_array()) {
            fail(path, "expected a number or an array of numbers");
        }
        Vector v(static_cast<Eigen::Index>(j.size()));
        for (std::size_t i = 0; i < j.size(); ++i) {
            v(static_cast<Eigen::Index>(i)) = number(j[i], path + "[" + std::to_string(i) + "]");
        }
        if (size && v.size() != *size) {
            fail(path, "expected " + std::to_string(*size) + " entries, got " + std::to_string(v.size()));
        }
        return v;
    }

    Vector vector_or(const json& obj, const std::string& path, const char* key, Eigen::Index size,
                     double fallback) const {
        const json* j = find(obj, path, key);
        return j == nullptr ? Vector::Constant(size, fallback) : vector(*j, join(path, key), size);
    }

    /// Array of rows; [] is a matrix with zero rows and `cols` columns.
    Matrix matrix(const json& j, const std::string& path, std::optional<Eigen::Index> cols) const {
        if (!j.is_array()) {
            fail(path, "expected an array of rows");
        }
        if (j.empty()) {
            return Matrix(0, cols.value_or(0));
        }
        const auto rows = static_cast<Eigen::Index>(j.size());
        Matrix out;
        for (Eigen::Index r = 0; r < rows; ++r) {
            const auto row_path = path + "[" + std::to_string(r) + "]";
            const Vector row = vector(j[static_cast<std::size_t>(r)], row_path, std::nullopt);
            if (r == 0) {
                if (cols && row.size() != *cols) {
                    fail(row_path, "expected " + std::to_string(*cols) + " columns, got " + std::to_string(row.size()));
                }
                out.resize(rows, row.size());
            } else if (row.size() != out.cols()) {
                fail(row_path, "ragged matrix rows");
            }
            out.row(r) = row.transpose();
        }
        return out;
    }

    static std::string join(const std::string& path, const std::string& key) {
        return path.empty() ? key : path + "." + key;
    }

private:
    const std::string& text_;
    std::string source_;
};

json to_json(const Vector& v) {
    json j = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        j.push_back(v(i));
    }
    return j;
}

json to_json(const Matrix& m) {
    json j = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        j.push_back(to_json(Vector(m.row(r).transpose())));
    }
    return j;
}

QpSection parse_problem(const Reader& rd, const json& j) {
    const std::string path = "problem";
    rd.allow_keys(j, path, {"H", "c", "constant", "A", "b", "G", "h"});
    QpSection s;
    s.H = rd.matrix(rd.require(j, path, "H"), "problem.H", std::nullopt);
    const auto n = s.H.rows();
    if (n == 0 || s.H.cols() != n) {
        rd.fail("problem.H", "H must be a nonempty square matrix");
    }
    s.c = rd.vector_or(j, path, "c", n, 0.0);
    s.constant = rd.number_or(j, path, "constant", 0.0);
    s.A = rd.find(j, path, "A") ? rd.matrix(*rd.find(j, path, "A"), "problem.A", n) : Matrix(0, n);
    s.b = rd.vector_or(j, path, "b", s.A.rows(), 0.0);
    s.G = rd.find(j, path, "G") ? rd.matrix(*rd.find(j, path, "G"), "problem.G", n) : Matrix(0, n);
    s.h = rd.vector_or(j, path, "h", s.G.rows(), 0.0);
    try {
        (void)ConvexProblem::quadratic({s.H, s.c, s.constant}, s.A, s.b, s.G, s.h);
    } catch (const ContractViolation& e) {
        rd.fail("problem.H", e.what());
    }
    return s;
}

DrivenSection parse_driven(const Reader& rd, const json& j) {
    const std::string path = "driven";
    rd.allow_keys(j, path, {"G", "h", "offset", "amplitude", "phase", "omega"});
    DrivenSection s;
    s.G = rd.matrix(rd.require(j, path, "G"), "driven.G", std::nullopt);
    const auto n = s.G.cols();
    if (s.G.rows() == 0 || n == 0) {
        rd.fail("driven.G", "driven scenarios need at least one constraint row");
    }
    s.h = rd.vector_or(j, path, "h", s.G.rows(), 0.0);
    s.offset = rd.vector(rd.require(j, path, "offset"), "driven.offset", n);
    s.amplitude = rd.vector_or(j, path, "amplitude", n, 0.0);
    s.phase = rd.vector_or(j, path, "phase", n, 0.0);
    s.omega = rd.number_or(j, path, "omega", 1.0);
    return s;
}

HvacSection parse_hvac(const Reader& rd, const json& j) {
    rd.allow_keys(j, "hvac", {"zones", "network", "welfare", "schedule", "load", "settle"});
    const double zones = rd.number(rd.require(j, "hvac", "zones"), "hvac.zones");
    if (zones < 1 || zones != std::floor(zones) || zones > 64) {
        rd.fail("hvac.zones", "zones must be an integer in [1, 64]");
    }
    const auto N = static_cast<std::size_t>(zones);
    const auto n = static_cast<Eigen::Index>(N);
    HvacSection s;
    const auto defaults_net = hvac::ThermalNetwork::reference(N);
    const auto defaults_welfare = hvac::WelfareParams::reference(N);

    const json empty = json::object();
    const json* net_j = rd.find(j, "hvac", "network");
    const json& nj = net_j ? *net_j : empty;
    rd.allow_keys(nj, "hvac.network", {"T_inf", "R_amb", "R_zone", "d", "theta", "C"});
    auto& net = s.network;
    net.N = N;
    net.T_inf = rd.number_or(nj, "hvac.network", "T_inf", defaults_net.T_inf);
    net.theta = rd.number_or(nj, "hvac.network", "theta", defaults_net.theta);
    net.R_amb = rd.find(nj, "hvac.network", "R_amb") ? rd.vector(nj["R_amb"], "hvac.network.R_amb", n) : defaults_net.R_amb;
    net.d = rd.find(nj, "hvac.network", "d") ? rd.vector(nj["d"], "hvac.network.d", n) : defaults_net.d;
    net.C = rd.find(nj, "hvac.network", "C") ? rd.vector(nj["C"], "hvac.network.C", n) : defaults_net.C;
    if (const json* rz = rd.find(nj, "hvac.network", "R_zone")) {
        if (rz->is_number()) {
            const double r = rd.number(*rz, "hvac.network.R_zone");
            net.R_zone = (defaults_net.R_zone.array() > 0.0).cast<double>().matrix() * r;
        } else {
            net.R_zone = rd.matrix(*rz, "hvac.network.R_zone", n);
            if (net.R_zone.rows() != n) {
                rd.fail("hvac.network.R_zone", "R_zone must be N x N");
            }
        }
    } else {
        net.R_zone = defaults_net.R_zone;
    }
    try {
        net.validate();
    } catch (const ContractViolation& e) {
        rd.fail("hvac.network", e.what());
    }

    const json* wel_j = rd.find(j, "hvac", "welfare");
    const json& wj = wel_j ? *wel_j : empty;
    rd.allow_keys(wj, "hvac.welfare", {"gamma", "T_ref", "b_util", "rho", "T_min", "T_max"});
    auto& w = s.welfare;
    auto vec_or = [&](const char* key, const Vector& fallback) {
        return rd.find(wj, "hvac.welfare", key) ? rd.vector(wj[key], std::string("hvac.welfare.") + key, n) : fallback;
    };
    w.gamma = vec_or("gamma", defaults_welfare.gamma);
    w.T_ref = vec_or("T_ref", defaults_welfare.T_ref);
    w.b_util = vec_or("b_util", defaults_welfare.b_util);
    w.T_min = vec_or("T_min", defaults_welfare.T_min);
    w.T_max = vec_or("T_max", defaults_welfare.T_max);
    w.rho = defaults_welfare.rho;
    if (const json* rho = rd.find(wj, "hvac.welfare", "rho")) {
        const Vector r = rd.vector(*rho, "hvac.welfare.rho", 3);
        w.rho = {r(0), r(1), r(2)};
    }
    try {
        w.validate(N);
    } catch (const ContractViolation& e) {
        rd.fail("hvac.welfare", e.what());
    }

    s.schedule = hvac::TouSchedule::flat(1.0);
    if (const json* sj = rd.find(j, "hvac", "schedule")) {
        rd.allow_keys(*sj, "hvac.schedule", {"breakpoints", "prices"});
        const Vector bp = rd.vector(rd.require(*sj, "hvac.schedule", "breakpoints"), "hvac.schedule.breakpoints", std::nullopt);
        const Vector pr = rd.vector(rd.require(*sj, "hvac.schedule", "prices"), "hvac.schedule.prices", std::nullopt);
        s.schedule.breakpoints.assign(bp.data(), bp.data() + bp.size());
        s.schedule.prices.assign(pr.data(), pr.data() + pr.size());
        try {
            s.schedule.validate();
        } catch (const ContractViolation& e) {
            rd.fail("hvac.schedule", e.what());
        }
    }

    if (const json* lj = rd.find(j, "hvac", "load")) {
        rd.allow_keys(*lj, "hvac.load", {"occupancy_peak", "solar_peak", "segment_hours"});
        s.load.occupancy_peak = rd.number_or(*lj, "hvac.load", "occupancy_peak", 0.0);
        s.load.solar_peak = rd.number_or(*lj, "hvac.load", "solar_peak", 0.0);
        s.load.segment_hours = rd.number_or(*lj, "hvac.load", "segment_hours", 1.0);
        if (!(s.load.segment_hours > 0.0)) {
            rd.fail("hvac.load.segment_hours", "must be positive");
        }
    }
    if (const json* st = rd.find(j, "hvac", "settle")) {
        rd.allow_keys(*st, "hvac.settle", {"chunk", "max_time_constants"});
        s.chunk = rd.number_or(*st, "hvac.settle", "chunk", s.chunk);
        s.max_time_constants = rd.number_or(*st, "hvac.settle", "max_time_constants", s.max_time_constants);
        if (!(s.chunk > 0.0) || !(s.max_time_constants > 0.0)) {
            rd.fail("hvac.settle", "chunk and max_time_constants must be positive");
        }
    }
    return s;
}

}  // namespace

ParseError::ParseError(const std::string& source, std::size_t line, std::size_t column, std::string path,
                       const std::string& message)
    : Error(source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " +
            (path.empty() ? "" : path + ": ") + message),
      line_(line), column_(column), path_(std::move(path)) {}

const char* to_string(Kind kind) {
    switch (kind) {
        case Kind::problem:
            return "problem";
        case Kind::hvac:
            return "hvac";
        case Kind::driven:
            return "driven";
    }
    return "unknown";
}

const std::vector<std::string>& certificate_names() {
    static const std::vector<std::string> names{"unforced_decrease", "hybrid_passivity", "switch_ledger",
                                                "quadratic_norm", "convergence"};
    return names;
}

TimeSignal DrivenSection::signal() const {
    const Vector off = offset;
    const Vector amp = amplitude;
    const Vector ph = phase;
    const double w = omega;
    return TimeSignal{
        [off, amp, ph, w](double t) { return (off.array() + amp.array() * (w * t + ph.array()).sin()).matrix().eval(); },
        [amp, ph, w](double t) { return (w * amp.array() * (w * t + ph.array()).cos()).matrix().eval(); },
    };
}

std::size_t Scenario::n() const {
    switch (kind) {
        case Kind::problem:
            return static_cast<std::size_t>(problem->H.rows());
        case Kind::hvac:
            return hvac->network.N + 1;
        case Kind::driven:
            return static_cast<std::size_t>(driven->G.cols());
    }
    return 0;
}

std::size_t Scenario::m() const {
    switch (kind) {
        case Kind::problem:
            return static_cast<std::size_t>(problem->A.rows());
        case Kind::hvac:
            return 1;
        case Kind::driven:
            return 0;
    }
    return 0;
}

std::size_t Scenario::p() const {
    switch (kind) {
        case Kind::problem:
            return static_cast<std::size_t>(problem->G.rows());
        case Kind::hvac:
            return 2 * hvac->network.N;
        case Kind::driven:
            return static_cast<std::size_t>(driven->G.rows());
    }
    return 0;
}

std::shared_ptr<const ConvexProblem> Scenario::build_problem() const {
    switch (kind) {
        case Kind::problem:
            return std::make_shared<const ConvexProblem>(ConvexProblem::quadratic(
                {problem->H, problem->c, problem->constant}, problem->A, problem->b, problem->G, problem->h));
        case Kind::hvac:
            return std::make_shared<const ConvexProblem>(hvac::build_welfare_problem(hvac->network, hvac->welfare));
        case Kind::driven: {
            const auto nn = driven->G.cols();
            return std::make_shared<const ConvexProblem>(ConvexProblem::quadratic(
                {Matrix::Identity(nn, nn), Vector::Zero(nn), 0.0}, Matrix(0, nn), Vector(0), driven->G, driven->h));
        }
    }
    throw ContractViolation("unknown scenario kind");
}

ComposedSystem Scenario::build_system() const {
    auto prob = build_problem();
    ProjectionSystem proj(prob, dynamics.tau_mu);
    if (kind == Kind::driven) {
        return ComposedSystem::driven(std::move(proj), driven->signal());
    }
    return ComposedSystem(BmSystem::with_diagonal(prob, dynamics.tau_x, dynamics.tau_lambda), std::move(proj));
}

FullState Scenario::initial_state(const ComposedSystem& sys) const {
    return make_state(sys, 0.0, dynamics.x0, dynamics.lambda0, dynamics.mu0);
}

hvac::Dynamics Scenario::hvac_dynamics() const {
    if (kind != Kind::hvac) {
        throw ContractViolation("not an hvac scenario");
    }
    const auto N = static_cast<Eigen::Index>(hvac->network.N);
    return hvac::Dynamics{dynamics.tau_x.head(N), dynamics.tau_x(N), dynamics.tau_lambda(0), dynamics.tau_mu.head(N),
                          dynamics.tau_mu.tail(N)};
}

Scenario parse_scenario(const std::string& text, const std::string& source) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
        throw ParseError(source, line, col, "", std::string("malformed JSON: ") + e.what());
    }
    const Reader rd(text, source);
    rd.allow_keys(root, "", {"name", "problem", "hvac", "driven", "dynamics", "integrator", "outputs"});

    Scenario s;
    if (const json* name = rd.find(root, "", "name")) {
        if (!name->is_string()) {
            rd.fail("name", "expected a string");
        }
        s.name = name->get<std::string>();
    }
    const int sections = (root.contains("problem") ? 1 : 0) + (root.contains("hvac") ? 1 : 0) +
                         (root.contains("driven") ? 1 : 0);
    if (sections != 1) {
        rd.fail("", "exactly one of 'problem', 'hvac' or 'driven' must be present");
    }
    if (root.contains("problem")) {
        s.kind = Kind::problem;
        s.problem = parse_problem(rd, root["problem"]);
    } else if (root.contains("hvac")) {
        s.kind = Kind::hvac;
        s.hvac = parse_hvac(rd, root["hvac"]);
    } else {
        s.kind = Kind::driven;
        s.driven = parse_driven(rd, root["driven"]);
    }
    const auto n = static_cast<Eigen::Index>(s.n());
    const auto m = static_cast<Eigen::Index>(s.m());
    const auto p = static_cast<Eigen::Index>(s.p());

    const json empty = json::object();
    const json& dj = root.contains("dynamics") ? root["dynamics"] : empty;
    rd.allow_keys(dj, "dynamics", {"tau_x", "tau_lambda", "tau_mu", "initial"});
    auto& d = s.dynamics;
    d.tau_x = rd.vector_or(dj, "dynamics", "tau_x", n, 1.0);
    d.tau_lambda = rd.vector_or(dj, "dynamics", "tau_lambda", m, 1.0);
    d.tau_mu = rd.vector_or(dj, "dynamics", "tau_mu", p, 1.0);
    for (const auto* tau : {&d.tau_x, &d.tau_lambda, &d.tau_mu}) {
        if (tau->size() > 0 && !(tau->minCoeff() > 0.0)) {
            rd.fail("dynamics", "time constants must be positive");
        }
    }
    const json& ij = dj.contains("initial") ? dj["initial"] : empty;
    rd.allow_keys(ij, "dynamics.initial", {"x", "lambda", "mu"});
    Vector x_default = Vector::Zero(n);
    if (s.kind == Kind::hvac) {
        x_default.head(n - 1) = s.hvac->welfare.T_ref;
    } else if (s.kind == Kind::driven) {
        x_default = s.driven->offset;
    }
    d.x0 = ij.contains("x") ? rd.vector(ij["x"], "dynamics.initial.x", n) : x_default;
    d.lambda0 = rd.vector_or(ij, "dynamics.initial", "lambda", m, 0.0);
    d.mu0 = rd.vector_or(ij, "dynamics.initial", "mu", p, 0.0);
    if (d.mu0.size() > 0 && d.mu0.minCoeff() < 0.0) {
        rd.fail("dynamics.initial.mu", "initial multipliers must be nonnegative");
    }

    const json& ig = root.contains("integrator") ? root["integrator"] : empty;
    rd.allow_keys(ig, "integrator",
                  {"dt_init", "dt_min", "dt_max", "event_tol", "rel_tol", "abs_tol", "horizon", "record_stride",
                   "adaptive"});
    auto& o = s.integrator;
    o.dt_init = rd.number_or(ig, "integrator", "dt_init", o.dt_init);
    o.dt_min = rd.number_or(ig, "integrator", "dt_min", o.dt_min);
    o.dt_max = rd.number_or(ig, "integrator", "dt_max", o.dt_max);
    o.event_tol = rd.number_or(ig, "integrator", "event_tol", o.event_tol);
    o.rel_tol = rd.number_or(ig, "integrator", "rel_tol", o.rel_tol);
    o.abs_tol = rd.number_or(ig, "integrator", "abs_tol", o.abs_tol);
    o.horizon = rd.number_or(ig, "integrator", "horizon", o.horizon);
    o.record_stride = rd.number_or(ig, "integrator", "record_stride", o.record_stride);
    if (ig.contains("adaptive")) {
        if (!ig["adaptive"].is_boolean()) {
            rd.fail("integrator.adaptive", "expected true or false");
        }
        o.adaptive = ig["adaptive"].get<bool>();
    }
    try {
        o.validate();
    } catch (const ContractViolation& e) {
        rd.fail("integrator", e.what());
    }

    const json& oj = root.contains("outputs") ? root["outputs"] : empty;
    rd.allow_keys(oj, "outputs", {"directory", "certificates"});
    if (oj.contains("directory")) {
        if (!oj["directory"].is_string()) {
            rd.fail("outputs.directory", "expected a string");
        }
        s.outputs.directory = oj["directory"].get<std::string>();
    }
    if (oj.contains("certificates")) {
        const auto& cj = oj["certificates"];
        if (!cj.is_array()) {
            rd.fail("outputs.certificates", "expected an array of names");
        }
        for (std::size_t i = 0; i < cj.size(); ++i) {
            const auto path = "outputs.certificates[" + std::to_string(i) + "]";
            if (!cj[i].is_string()) {
                rd.fail(path, "expected a string");
            }
            const auto name = cj[i].get<std::string>();
            const auto& known = certificate_names();
            if (std::find(known.begin(), known.end(), name) == known.end()) {
                rd.fail(path, "unknown certificate '" + name + "'");
            }
            s.outputs.certificates.push_back(name);
        }
    } else {
        s.outputs.certificates = certificate_names();
    }
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError(path.string(), 0, 0, "", "cannot open scenario file");
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path.string());
}

json to_manifest(const Scenario& s) {
    json j;
    j["name"] = s.name;
    switch (s.kind) {
        case Kind::problem: {
            const auto& q = *s.problem;
            j["problem"] = {{"H", to_json(q.H)}, {"c", to_json(q.c)}, {"constant", q.constant},
                            {"A", to_json(q.A)}, {"b", to_json(q.b)}, {"G", to_json(q.G)}, {"h", to_json(q.h)}};
            break;
        }
        case Kind::driven: {
            const auto& dr = *s.driven;
            j["driven"] = {{"G", to_json(dr.G)},           {"h", to_json(dr.h)},
                           {"offset", to_json(dr.offset)}, {"amplitude", to_json(dr.amplitude)},
                           {"phase", to_json(dr.phase)},   {"omega", dr.omega}};
            break;
        }
        case Kind::hvac: {
            const auto& h = *s.hvac;
            const auto& net = h.network;
            const auto& w = h.welfare;
            j["hvac"] = {
                {"zones", net.N},
                {"network",
                 {{"T_inf", net.T_inf}, {"R_amb", to_json(net.R_amb)}, {"R_zone", to_json(net.R_zone)},
                  {"d", to_json(net.d)}, {"theta", net.theta}, {"C", to_json(net.C)}}},
                {"welfare",
                 {{"gamma", to_json(w.gamma)}, {"T_ref", to_json(w.T_ref)}, {"b_util", to_json(w.b_util)},
                  {"rho", {w.rho[0], w.rho[1], w.rho[2]}}, {"T_min", to_json(w.T_min)}, {"T_max", to_json(w.T_max)}}},
                {"schedule", {{"breakpoints", h.schedule.breakpoints}, {"prices", h.schedule.prices}}},
                {"load",
                 {{"occupancy_peak", h.load.occupancy_peak}, {"solar_peak", h.load.solar_peak},
                  {"segment_hours", h.load.segment_hours}}},
                {"settle", {{"chunk", h.chunk}, {"max_time_constants", h.max_time_constants}}},
            };
            break;
        }
    }
    const auto& d = s.dynamics;
    j["dynamics"] = {{"tau_x", to_json(d.tau_x)},
                     {"tau_lambda", to_json(d.tau_lambda)},
                     {"tau_mu", to_json(d.tau_mu)},
                     {"initial", {{"x", to_json(d.x0)}, {"lambda", to_json(d.lambda0)}, {"mu", to_json(d.mu0)}}}};
    const auto& o = s.integrator;
    j["integrator"] = {{"dt_init", o.dt_init},     {"dt_min", o.dt_min},   {"dt_max", o.dt_max},
                       {"event_tol", o.event_tol}, {"rel_tol", o.rel_tol}, {"abs_tol", o.abs_tol},
                       {"horizon", o.horizon},     {"record_stride", o.record_stride}, {"adaptive", o.adaptive}};
    j["outputs"] = {{"directory", s.outputs.directory}, {"certificates", s.outputs.certificates}};
    return j;
}

}  // namespace pdflow::scenario
