#include "cli.hpp"

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "config.hpp"
#include "giantpair/error.hpp"
#include "giantpair/model.hpp"
#include "manifest.hpp"
#include "scenarios.hpp"

namespace giantpair::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Args {
    std::string config;
    std::string preset;
    std::string out;
    std::optional<std::uint64_t> seed;
    int threads = 0;
    bool sequential = false;
    bool plotscript = false;
};

struct Failure {
    int code;
    const char* kind;
};

Failure classify(const std::exception& e) {
    if (dynamic_cast<const UnknownScenarioError*>(&e)) return {2, "UnknownScenario"};
    if (dynamic_cast<const ConfigError*>(&e)) return {2, "ConfigError"};
    if (dynamic_cast<const InvalidGridError*>(&e)) return {2, "InvalidGridError"};
    if (dynamic_cast<const OverlappingBandError*>(&e)) return {2, "OverlappingBandError"};
    if (dynamic_cast<const DimensionError*>(&e)) return {2, "DimensionError"};
    if (dynamic_cast<const PoleError*>(&e)) return {3, "PoleError"};
    if (dynamic_cast<const ResolutionError*>(&e)) return {3, "ResolutionError"};
    if (dynamic_cast<const IntegratorFailure*>(&e)) return {3, "IntegratorFailure"};
    if (dynamic_cast<const NormDriftError*>(&e)) return {3, "NormDriftError"};
    if (dynamic_cast<const Error*>(&e)) return {1, "Error"};
    if (dynamic_cast<const fs::filesystem_error*>(&e)) return {1, "FilesystemError"};
    return {1, "UnexpectedError"};
}

int report(const std::exception& e) {
    const auto f = classify(e);
    json doc{{"status", "error"}, {"error", f.kind}, {"message", e.what()}, {"exit_code", f.code}};
    if (dynamic_cast<const UnknownScenarioError*>(&e)) doc["valid_scenarios"] = scenario_names();
    if (const auto* n = dynamic_cast<const NormDriftError*>(&e))
        doc["diagnostic"] = {{"step", n->step()}, {"time", n->time()}, {"drift", n->drift()}};
    fmt::print(stderr, "{}\n", doc.dump());
    return f.code;
}

Overrides overrides_of(const Args& a) {
    Overrides o;
    if (!a.preset.empty()) o.preset = parse_preset(a.preset);
    if (!a.out.empty()) o.output = a.out;
    o.seed = a.seed;
    return o;
}

fs::path output_dir(const fs::path& out) {
    const char* root = std::getenv(output_root_env);
    if (out.is_relative() && root && *root) return fs::path(root) / out;
    return out;
}

int execute(const Args& a, std::optional<std::string> scenario) {
    auto o = overrides_of(a);
    o.scenario = std::move(scenario);
    auto cfg = load_config(a.config, o);
    const auto dir = output_dir(cfg.output);
    cfg.output = dir;

    if (cfg.scenario != "optimize") {
        // Pairs wrap the periodic box after L_eff/2; the cascade field only
        // needs to avoid coming back around to A, a full L_eff.
        const ModeGrid grid(cfg.model.modes, cfg.model.k_max);
        const bool cascade = cfg.scenario == "fig10" || cfg.scenario == "fig11";
        const double limit = cascade ? grid.L_eff() / grid.c() : 0.5 * grid.L_eff() / grid.c();
        if (cfg.propagation.t_end > limit)
            fmt::print(stderr, "{}\n",
                       json{{"status", "warning"},
                            {"message", fmt::format("t_end {} exceeds {:.1f}; photons wrap the periodic box",
                                                    cfg.propagation.t_end, limit)}}
                           .dump());
    }

    prepare_output_dir(dir);
    RunOptions opt;
    opt.exec = a.sequential ? Execution::serial() : Execution{a.threads, false};
    opt.plotscript = a.plotscript;
    run_scenario(cfg, dir, opt);
    write_manifest(dir, cfg.to_json());
    fmt::print("{}\n", json{{"status", "ok"},
                            {"scenario", cfg.scenario},
                            {"output", dir.string()},
                            {"files", scan_outputs(dir).size()}}
                           .dump());
    return 0;
}

void add_run_options(CLI::App* cmd, Args& a, bool with_preset) {
    cmd->add_option("--config", a.config, "Scenario config (JSON, comments allowed)")->required();
    if (with_preset) cmd->add_option("--preset", a.preset, "Scenario defaults")->check(CLI::IsMember({"desk", "paper"}));
    cmd->add_option("--out", a.out, "Output directory");
    cmd->add_option("--seed", a.seed, "Random seed");
    auto* threads = cmd->add_option("--threads", a.threads, "Worker threads")->check(CLI::PositiveNumber);
    cmd->add_flag("--sequential", a.sequential, "Single-threaded deterministic mode")->excludes(threads);
    cmd->add_flag("--emit-plotscript", a.plotscript, "Write a gnuplot script next to the outputs");
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"Correlated two-photon emission from giant atoms"};
    app.require_subcommand(1);
    Args a;
    auto* run = app.add_subcommand("run", "Run the scenario named in the config");
    add_run_options(run, a, true);
    auto* opt = app.add_subcommand("optimize", "Optimize a coupling sequence");
    add_run_options(opt, a, true);
    auto* validate = app.add_subcommand("validate", "Check a config against the schema");
    validate->add_option("--config", a.config, "Scenario config")->required();
    validate->add_option("--preset", a.preset, "Scenario defaults")->check(CLI::IsMember({"desk", "paper"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        fmt::print(stderr, "{}\n",
                   json{{"status", "error"}, {"error", "UsageError"}, {"message", e.what()}, {"exit_code", 2}}.dump());
        return 2;
    }

    try {
        if (*validate) {
            const auto cfg = load_config(a.config, overrides_of(a));
            ModeGrid(cfg.model.modes, cfg.model.k_max);
            fmt::print("{}\n", json{{"status", "ok"}, {"config", cfg.to_json()}}.dump(2));
            return 0;
        }
        return execute(a, *opt ? std::optional<std::string>("optimize") : std::nullopt);
    } catch (const std::exception& e) {
        return report(e);
    }
}

}  // namespace giantpair::cli
