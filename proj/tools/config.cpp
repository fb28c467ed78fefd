#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "giantpair/error.hpp"

namespace giantpair::cli {

using nlohmann::json;
namespace fs = std::filesystem;

const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names{"fig2", "fig4", "fig5", "fig8", "fig10", "fig11", "optimize", "sweep"};
    return names;
}

Preset parse_preset(const std::string& name) {
    if (name == "desk") return Preset::desk;
    if (name == "paper") return Preset::paper;
    throw ConfigError(fmt::format("unknown preset '{}' (desk, paper)", name));
}

std::string to_string(Preset p) { return p == Preset::desk ? "desk" : "paper"; }

namespace {

const char* source_name(SourceKind k) {
    switch (k) {
        case SourceKind::table1: return "table1";
        case SourceKind::table2: return "table2";
        case SourceKind::file: return "file";
        case SourceKind::ideal_window: return "ideal-window";
        case SourceKind::optimize: return "optimize";
    }
    return "";
}

// Large-grid presets keep the desk decay rate: g0 scales as M^{-1/2}.
double rescale(double g0, std::size_t from, std::size_t to) {
    return g0 * std::sqrt(static_cast<double>(from) / static_cast<double>(to));
}

ScenarioConfig defaults(const std::string& scenario, Preset preset) {
    ScenarioConfig c;
    c.scenario = scenario;
    c.preset = preset;
    const bool desk = preset == Preset::desk;
    auto& m = c.model;
    auto& p = c.propagation;
    if (scenario == "fig2" || scenario == "sweep") {
        // The ideal window only touches a few dozen modes, so M = 2000 is cheap.
        m.modes = 2000;
        m.delta_w = 0.033;
        c.coupling.kind = SourceKind::ideal_window;
        c.sweep.parameter = "delta";
        c.sweep.values = {0.067, 0.1, 0.133, 0.2};
        c.sweep.fixed_rate = 1e-3;
        p.t_end = 1500.0;
    } else if (scenario == "fig4") {
        m.modes = desk ? 400 : 2000;
        m.g0 = desk ? 0.004 : rescale(0.004, 400, 2000);
        c.coupling.kind = SourceKind::table1;
        c.sweep.parameter = "delta";
        c.sweep.values = {0.15, 0.2, 0.25};
        p.t_end = desk ? 300.0 : 1500.0;
    } else if (scenario == "fig5" || scenario == "fig8") {
        const bool chiral = scenario == "fig8";
        const double t = chiral ? 135.0 : 90.0;
        m.modes = desk ? 500 : 2000;
        m.g0 = desk ? 0.0085 : rescale(0.0085, 500, 2000);
        c.coupling.kind = chiral ? SourceKind::table2 : SourceKind::table1;
        p.t_end = t;
        c.analysis_times = {t};
    } else if (scenario == "fig10" || scenario == "fig11") {
        // omega_eg = 1.15 falls on a mode of the M = 2000 grid; M = 1998 avoids the pole.
        m.modes = desk ? 500 : 1998;
        m.g0 = desk ? 0.011 : rescale(0.011, 500, 1998);
        c.coupling.kind = SourceKind::table2;
        c.d_s = 40.0;
        p.t_end = desk ? 780.0 : 1500.0;
        if (scenario == "fig10") {
            c.diagonal_stride = 50;
            c.analysis_times = {180.0};
        } else {
            p.snapshot_stride = desk ? 150 : 250;  // g2(0) sampling interval in steps
            c.analysis_times = {175.0};
        }
    } else if (scenario == "optimize") {
        c.coupling.kind = SourceKind::optimize;
        c.optimize.restarts = desk ? 8 : 32;
    } else {
        throw UnknownScenarioError(fmt::format("unknown scenario '{}'; valid: {}", scenario,
                                      fmt::join(scenario_names(), ", ")));
    }
    return c;
}

class Section {
public:
    Section(const json& j, std::string path, std::initializer_list<const char*> keys) : j_(j), path_(std::move(path)) {
        if (!j.is_object()) throw ConfigError(fmt::format("'{}' must be an object", path_));
        for (const auto& [k, v] : j.items())
            if (std::find_if(keys.begin(), keys.end(), [&](const char* a) { return k == a; }) == keys.end())
                throw ConfigError(fmt::format("unknown key '{}{}'", path_.empty() ? "" : path_ + ".", k));
    }

    bool has(const char* key) const { return j_.contains(key); }
    const json& raw(const char* key) const { return j_.at(key); }

    template <class T>
    void get(const char* key, T& out) const {
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(fmt::format("'{}' has the wrong type", name(key)));
        }
    }

    std::string name(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    const json& j_;
    std::string path_;
};

void require(bool ok, const std::string& message) {
    if (!ok) throw ConfigError(message);
}

void apply(ScenarioConfig& c, const json& doc, const fs::path& base_dir) {
    const Section top(doc, "", {"schema_version", "scenario", "preset", "model", "coupling", "optimize", "propagation",
                                "analysis", "cascade", "sweep", "output", "seed"});

    if (top.has("model")) {
        const Section s(top.raw("model"), "model", {"modes", "k_max", "delta", "omega_eg", "delta_w", "g0"});
        require(!(s.has("delta") && s.has("omega_eg")), "model: give either 'delta' or 'omega_eg', not both");
        s.get("modes", c.model.modes);
        s.get("k_max", c.model.k_max);
        s.get("delta", c.model.delta);
        if (s.has("omega_eg")) {
            double w = 0.0;
            s.get("omega_eg", w);
            c.model.delta = w - 1.0;
        }
        s.get("delta_w", c.model.delta_w);
        s.get("g0", c.model.g0);
    }

    if (top.has("coupling")) {
        std::string src;
        top.get("coupling", src);
        if (src.rfind("file:", 0) == 0) {
            c.coupling.kind = SourceKind::file;
            fs::path p = src.substr(5);
            require(!p.empty(), "coupling: 'file:' needs a path");
            c.coupling.file = p.is_absolute() ? p : base_dir / p;
        } else if (src == "table1") {
            c.coupling.kind = SourceKind::table1;
        } else if (src == "table2") {
            c.coupling.kind = SourceKind::table2;
        } else if (src == "ideal-window") {
            c.coupling.kind = SourceKind::ideal_window;
        } else if (src == "optimize") {
            c.coupling.kind = SourceKind::optimize;
        } else {
            throw ConfigError(fmt::format(
                "coupling: unknown source '{}' (table1, table2, ideal-window, optimize, file:<path>)", src));
        }
    }

    if (top.has("optimize")) {
        const Section s(top.raw("optimize"), "optimize",
                        {"n_points", "grid_modes", "restarts", "max_iterations", "x_span", "chiral", "weights"});
        auto& o = c.optimize;
        s.get("n_points", o.n_points);
        s.get("grid_modes", o.grid_modes);
        s.get("restarts", o.restarts);
        s.get("max_iterations", o.max_iterations);
        s.get("x_span", o.x_span);
        s.get("chiral", o.chiral);
        if (s.has("weights")) {
            const Section w(s.raw("weights"), "optimize.weights", {"passband", "stopband", "elsewhere"});
            w.get("passband", o.weights.passband);
            w.get("stopband", o.weights.stopband);
            w.get("elsewhere", o.weights.elsewhere);
        }
    }

    if (top.has("propagation")) {
        const Section s(top.raw("propagation"), "propagation",
                        {"t_end", "dt", "method", "snapshot_stride", "norm_tol"});
        auto& p = c.propagation;
        s.get("t_end", p.t_end);
        s.get("dt", p.dt);
        if (s.has("method")) {
            std::string m;
            s.get("method", m);
            try {
                p.method = parse_method(m);
            } catch (const Error& e) {
                throw ConfigError(fmt::format("propagation.method: {}", e.what()));
            }
        }
        s.get("snapshot_stride", p.snapshot_stride);
        s.get("norm_tol", p.norm_tol);
    }

    if (top.has("analysis")) {
        const Section s(top.raw("analysis"), "analysis", {"times"});
        s.get("times", c.analysis_times);
    }

    if (top.has("cascade")) {
        const Section s(top.raw("cascade"), "cascade", {"d_s", "diagonal_stride"});
        s.get("d_s", c.d_s);
        s.get("diagonal_stride", c.diagonal_stride);
    }

    if (top.has("sweep")) {
        const Section s(top.raw("sweep"), "sweep", {"parameter", "values", "fixed_rate"});
        s.get("parameter", c.sweep.parameter);
        s.get("values", c.sweep.values);
        if (s.has("fixed_rate")) {
            if (s.raw("fixed_rate").is_null()) {
                c.sweep.fixed_rate.reset();
            } else {
                double r = 0.0;
                s.get("fixed_rate", r);
                c.sweep.fixed_rate = r;
            }
        }
    }

    if (top.has("output")) {
        std::string out;
        top.get("output", out);
        c.output = out;
    }
    top.get("seed", c.seed);
}

void check(const ScenarioConfig& c) {
    const auto& m = c.model;
    require(m.modes >= 4, "model.modes must be at least 4");
    require(m.k_max > 0.0, "model.k_max must be positive");
    require(m.delta_w > 0.0, "model.delta_w must be positive");
    require(m.g0 > 0.0, "model.g0 must be positive");
    const auto& p = c.propagation;
    require(p.t_end > 0.0, "propagation.t_end must be positive");
    require(p.dt > 0.0 && p.dt <= p.t_end, "propagation.dt must lie in (0, t_end]");
    require(p.norm_tol > 0.0, "propagation.norm_tol must be positive");
    for (double t : c.analysis_times)
        require(t > 0.0 && t <= p.t_end, fmt::format("analysis time {} outside (0, t_end]", t));
    require(c.d_s >= 0.0, "cascade.d_s must be non-negative");

    const auto& o = c.optimize;
    require(o.n_points >= 1 && o.grid_modes >= 4 && o.restarts >= 1 && o.max_iterations >= 1,
            "optimize: n_points, grid_modes, restarts and max_iterations must be positive");
    require(o.x_span > 0.0, "optimize.x_span must be positive");

    if (c.coupling.kind == SourceKind::file)
        require(fs::is_regular_file(c.coupling.file),
                fmt::format("coupling file '{}' does not exist", c.coupling.file.string()));

    const bool sweeping = c.scenario == "fig2" || c.scenario == "fig4" || c.scenario == "sweep";
    if (sweeping) {
        const auto& s = c.sweep;
        require(s.parameter == "delta" || s.parameter == "delta_w" || s.parameter == "g0",
                fmt::format("sweep.parameter '{}' (delta, delta_w, g0)", s.parameter));
        require(!s.values.empty(), "sweep.values must not be empty");
        for (double v : s.values) require(v > 0.0, "sweep.values must be positive");
        if (s.fixed_rate) {
            require(*s.fixed_rate > 0.0, "sweep.fixed_rate must be positive");
            require(c.coupling.kind == SourceKind::ideal_window, "sweep.fixed_rate needs the ideal-window coupling");
            require(s.parameter != "g0", "sweep.fixed_rate sets g0 itself; sweep delta or delta_w instead");
        }
    }
    if (c.scenario == "fig10" || c.scenario == "fig11")
        require(c.coupling.kind != SourceKind::ideal_window,
                "cascade scenarios need a real-space coupling sequence, not the ideal window");
}

json read_document(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot read config '{}'", path.string()));
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return json::parse(ss.str(), nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

}  // namespace

nlohmann::json ScenarioConfig::to_json() const {
    const std::string coupling_text =
        coupling.kind == SourceKind::file ? "file:" + coupling.file.string() : source_name(coupling.kind);
    return json{
        {"schema_version", schema_version},
        {"scenario", scenario},
        {"preset", cli::to_string(preset)},
        {"model",
         {{"modes", model.modes},
          {"k_max", model.k_max},
          {"delta", model.delta},
          {"delta_w", model.delta_w},
          {"g0", model.g0}}},
        {"coupling", coupling_text},
        {"optimize",
         {{"n_points", optimize.n_points},
          {"grid_modes", optimize.grid_modes},
          {"restarts", optimize.restarts},
          {"max_iterations", optimize.max_iterations},
          {"x_span", optimize.x_span},
          {"chiral", optimize.chiral},
          {"weights",
           {{"passband", optimize.weights.passband},
            {"stopband", optimize.weights.stopband},
            {"elsewhere", optimize.weights.elsewhere}}}}},
        {"propagation",
         {{"t_end", propagation.t_end},
          {"dt", propagation.dt},
          {"method", giantpair::to_string(propagation.method)},
          {"snapshot_stride", propagation.snapshot_stride},
          {"norm_tol", propagation.norm_tol}}},
        {"analysis", {{"times", analysis_times}}},
        {"cascade", {{"d_s", d_s}, {"diagonal_stride", diagonal_stride}}},
        {"sweep",
         {{"parameter", sweep.parameter},
          {"values", sweep.values},
          {"fixed_rate", sweep.fixed_rate ? json(*sweep.fixed_rate) : json(nullptr)}}},
        {"output", output.string()},
        {"seed", seed},
    };
}

ScenarioConfig resolve(const json& doc, const fs::path& base_dir, const Overrides& overrides) {
    require(doc.is_object(), "config must be an object");
    require(doc.contains("schema_version"), "missing 'schema_version'");
    require(doc.at("schema_version").is_number_integer() && doc.at("schema_version").get<int>() == schema_version,
            fmt::format("unsupported schema_version (expected {})", schema_version));

    std::string scenario;
    if (overrides.scenario) {
        scenario = *overrides.scenario;
    } else {
        require(doc.contains("scenario") && doc.at("scenario").is_string(), "missing string 'scenario'");
        scenario = doc.at("scenario").get<std::string>();
    }
    Preset preset = Preset::desk;
    if (doc.contains("preset")) {
        require(doc.at("preset").is_string(), "'preset' must be a string");
        preset = parse_preset(doc.at("preset").get<std::string>());
    }
    if (overrides.preset) preset = *overrides.preset;

    auto c = defaults(scenario, preset);
    c.output = fs::path("out") / scenario;
    apply(c, doc, base_dir);
    if (overrides.output) c.output = *overrides.output;
    if (overrides.seed) c.seed = *overrides.seed;
    check(c);
    return c;
}

ScenarioConfig load_config(const fs::path& path, const Overrides& overrides) {
    const auto base = fs::absolute(path).parent_path();
    return resolve(read_document(path), base, overrides);
}

OptimizationProblem make_problem(const ScenarioConfig& cfg) {
    const auto& o = cfg.optimize;
    OptimizationProblem p(
        window_target(Units{}, AtomSpec::from_detuning(cfg.model.delta), cfg.model.delta_w, o.chiral));
    p.weights = o.weights;
    p.k_max = cfg.model.k_max;
    p.grid_modes = o.grid_modes;
    p.n_points = o.n_points;
    p.x_span = o.x_span;
    p.chiral = o.chiral;
    p.seed = cfg.seed;
    p.restarts = o.restarts;
    p.max_iterations = o.max_iterations;
    p.validate();
    return p;
}

CouplingSequence load_coupling(const ScenarioConfig& cfg, const Execution& exec) {
    switch (cfg.coupling.kind) {
        case SourceKind::table1: return load_table_sequence(TableId::table1, cfg.model.g0);
        case SourceKind::table2: return load_table_sequence(TableId::table2, cfg.model.g0);
        case SourceKind::file: return read_sequence(cfg.coupling.file, cfg.model.g0);
        case SourceKind::optimize: {
            const auto problem = make_problem(cfg);
            const auto r = problem.chiral ? optimize_chiral(problem, exec) : optimize_bidirectional(problem, exec);
            return r.sequence.with_g0(cfg.model.g0);
        }
        case SourceKind::ideal_window: break;
    }
    throw ConfigError("the ideal-window coupling has no real-space sequence");
}

}  // namespace giantpair::cli
