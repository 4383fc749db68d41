#pragma once

#include "pdflow/common.hpp"
#include "pdflow/hvac.hpp"
#include "pdflow/integrator.hpp"
#include "pdflow/interconnect.hpp"
#include "pdflow/problem.hpp"

#include <json.hpp>

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace pdflow::scenario {

/// Quadratic objective with affine equality and inequality blocks.
struct QpSection {
    Matrix H;
    Vector c;
    double constant = 0.0;
    Matrix A;
    Vector b;
    Matrix G;
    Vector h;
};

/// Projection subsystem alone under u~(t) = offset + amplitude .* sin(omega t + phase).
struct DrivenSection {
    Matrix G;
    Vector h;
    Vector offset;
    Vector amplitude;
    Vector phase;
    double omega = 1.0;

    [[nodiscard]] TimeSignal signal() const;
    [[nodiscard]] bool is_constant() const { return amplitude.size() == 0 || amplitude.isZero(0.0); }
};

struct HvacSection {
    hvac::ThermalNetwork network;
    hvac::WelfareParams welfare;
    hvac::TouSchedule schedule;
    hvac::LoadProfile load;
    double chunk = 10.0;
    double max_time_constants = 50.0;
};

struct DynamicsSection {
    Vector tau_x;
    Vector tau_lambda;
    Vector tau_mu;
    Vector x0;
    Vector lambda0;
    Vector mu0;
};

struct OutputsSection {
    std::string directory = "out";
    std::vector<std::string> certificates;
};

enum class Kind { problem, hvac, driven };

[[nodiscard]] const char* to_string(Kind kind);

/// Fully resolved scenario: every vector expanded, every default filled in.
struct Scenario {
    std::string name;
    Kind kind = Kind::problem;
    std::optional<QpSection> problem;
    std::optional<HvacSection> hvac;
    std::optional<DrivenSection> driven;
    DynamicsSection dynamics;
    IntegratorOptions integrator;
    OutputsSection outputs;

    [[nodiscard]] std::size_t n() const;
    [[nodiscard]] std::size_t m() const;
    [[nodiscard]] std::size_t p() const;

    /// Problem solved by the flow (base loads and unit price for hvac).
    [[nodiscard]] std::shared_ptr<const ConvexProblem> build_problem() const;
    [[nodiscard]] ComposedSystem build_system() const;
    [[nodiscard]] FullState initial_state(const ComposedSystem& sys) const;
    [[nodiscard]] hvac::Dynamics hvac_dynamics() const;
};

/// Parse or validation failure anchored to the source text.
class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t line, std::size_t column, std::string path,
               const std::string& message);
    [[nodiscard]] std::size_t line() const { return line_; }
    [[nodiscard]] std::size_t column() const { return column_; }
    [[nodiscard]] const std::string& path() const { return path_; }

private:
    std::size_t line_;
    std::size_t column_;
    std::string path_;
};

/// All certificate names known to the monitor.
[[nodiscard]] const std::vector<std::string>& certificate_names();

[[nodiscard]] Scenario parse_scenario(const std::string& text, const std::string& source = "<scenario>");
[[nodiscard]] Scenario load_scenario(const std::filesystem::path& path);

/// Resolved configuration; parse_scenario(to_manifest(s).dump()) reproduces s.
[[nodiscard]] nlohmann::json to_manifest(const Scenario& s);

}  // namespace pdflow::scenario
