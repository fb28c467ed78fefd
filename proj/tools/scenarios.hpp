#pragma once

#include <filesystem>

#include "config.hpp"
#include "giantpair/execution.hpp"

namespace giantpair::cli {

struct RunOptions {
    Execution exec;
    bool plotscript = false;
};

// Runs the configured scenario, writing every output into `dir`.
void run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& dir, const RunOptions& opt);

}  // namespace giantpair::cli
