#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "symtomo/dynamics.hpp"
#include "symtomo/oracle.hpp"
#include "symtomo/tomography.hpp"

namespace symtomo {

struct ForceSpec {
    enum class Kind { none, constant, table };
    Kind kind = Kind::none;
    double value = 0.0;
    std::vector<double> t, f;  ///< table nodes, linearly interpolated, held constant outside

    Force make() const;
};

struct StateSpec {
    enum class Kind { gaussian_packet, wavefunction };
    Kind kind = Kind::gaussian_packet;
    double p = 0.0, l = 1.0, q0 = 0.0;
    std::filesystem::path file;  ///< CSV with columns q, re, im on a uniform q grid
};

struct PdeCheckSpec {
    double k_factor = 1.0;  ///< k = k_factor / c with da^2(T) = c / T
    double step = 4e-3;
    std::vector<FokkerPlanckSample> samples;
};

struct OracleCheckSpec {
    std::vector<std::pair<double, double>> endpoints;  ///< (q_i, q_f)
    std::vector<double> outcome;
    int base_slices = 16;
};

struct Scenario {
    ForceSpec force;
    OscillatorModel model;
    MeasurementSpec measurement;
    StateSpec state;
    std::vector<std::pair<double, double>> directions;
    double x_min = -8.0, x_max = 8.0;
    int x_points = 801;
    std::vector<std::string> tasks;
    std::optional<double> tolerance;  ///< verify tolerance from the config, if given
    PdeCheckSpec pde;
    OracleCheckSpec oracle;
};

/// Reads a JSON scenario. Relative file paths resolve against the config
/// directory. Throws ConfigError with the offending key on any problem.
Scenario load_scenario(const std::filesystem::path& config);

enum class RunMode { run, verify };

struct TaskOutcome {
    std::string task;
    std::filesystem::path file;
    bool passed = true;
    std::string report;
};

struct RunReport {
    std::vector<TaskOutcome> tasks;
    int exit_code = 0;  ///< 0 ok, 4 when a verify task breached its tolerance
};

/// Runs the tasks of a scenario (verify mode runs only verify-* tasks) and
/// writes one CSV per task plus manifest.json into out_dir, each atomically.
/// Numeric failures propagate as symtomo::Error.
RunReport run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir, RunMode mode,
                       std::optional<double> tolerance_override = std::nullopt);

/// Default verify tolerances per task.
inline constexpr double kPdeTolerance = 1e-4;
inline constexpr double kOracleTolerance = 1e-2;

}  // namespace symtomo
