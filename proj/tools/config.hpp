#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "giantpair/dynamics.hpp"
#include "giantpair/error.hpp"
#include "giantpair/optimizer.hpp"

namespace giantpair::cli {

inline constexpr int schema_version = 1;

const std::vector<std::string>& scenario_names();

class UnknownScenarioError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

enum class Preset { desk, paper };
enum class SourceKind { table1, table2, file, ideal_window, optimize };

struct ModelParams {
    std::size_t modes = 500;
    double k_max = 2.0;
    double delta = 0.15;  // omega_eg - omega0
    double delta_w = 0.1;
    double g0 = 0.01;  // g_k0 for the ideal window
};

struct OptimizeParams {
    std::size_t n_points = 50;
    std::size_t grid_modes = 2000;
    std::size_t restarts = 32;
    std::size_t max_iterations = 1500;
    double x_span = 7.5;
    bool chiral = false;
    BandWeights weights;
};

struct CouplingSource {
    SourceKind kind = SourceKind::table1;
    std::filesystem::path file;  // resolved against the config's directory
};

struct PropagationParams {
    double t_end = 100.0;
    double dt = 0.1;
    Method method = Method::split_step;
    std::size_t snapshot_stride = 0;
    double norm_tol = 1e-8;
};

struct SweepParams {
    std::string parameter = "delta";  // delta | delta_w | g0
    std::vector<double> values;
    std::optional<double> fixed_rate;  // ideal window: pick g_k0 so the window-model rate is fixed
};

struct ScenarioConfig {
    std::string scenario;
    Preset preset = Preset::desk;
    ModelParams model;
    CouplingSource coupling;
    OptimizeParams optimize;
    PropagationParams propagation;
    std::vector<double> analysis_times;
    double d_s = 40.0;
    std::size_t diagonal_stride = 50;
    SweepParams sweep;
    std::filesystem::path output = "out";
    std::uint64_t seed = 1;

    nlohmann::json to_json() const;
};

struct Overrides {
    std::optional<std::string> scenario;
    std::optional<Preset> preset;
    std::optional<std::filesystem::path> output;
    std::optional<std::uint64_t> seed;
};

Preset parse_preset(const std::string& name);
std::string to_string(Preset p);

// Built-in defaults for the scenario and preset, then the config file's keys,
// then command-line overrides. Unknown keys and inconsistent values raise
// ConfigError.
ScenarioConfig resolve(const nlohmann::json& doc, const std::filesystem::path& base_dir,
                       const Overrides& overrides = {});
ScenarioConfig load_config(const std::filesystem::path& path, const Overrides& overrides = {});

OptimizationProblem make_problem(const ScenarioConfig& cfg);
CouplingSequence load_coupling(const ScenarioConfig& cfg, const Execution& exec);

}  // namespace giantpair::cli
