#include "scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "giantpair/analysis.hpp"
#include "giantpair/analytic.hpp"
#include "giantpair/cascade.hpp"
#include "giantpair/dynamics.hpp"
#include "giantpair/error.hpp"
#include "giantpair/optimizer.hpp"
#include "plotscript.hpp"

namespace giantpair::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const double x0 = Units{}.x0();

std::string tag(double t) { return fmt::format("t{:g}", t); }

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(fmt::format("cannot write {}", path.string()));
    out << text;
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

double max_of(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }

ModeGrid grid_of(const ScenarioConfig& cfg) { return ModeGrid(cfg.model.modes, cfg.model.k_max); }

bool ideal(const ScenarioConfig& cfg) { return cfg.coupling.kind == SourceKind::ideal_window; }

// The sequence that drives the run, written out alongside the results.
std::optional<CouplingSequence> sequence_of(const ScenarioConfig& cfg, const fs::path& dir, const RunOptions& opt) {
    if (ideal(cfg)) return std::nullopt;
    auto seq = load_coupling(cfg, opt.exec);
    write_sequence(dir / "coupling.seq", seq.with_g0(1.0), fmt::format("g0 = {}", cfg.model.g0));
    return seq;
}

CouplingSpectrum spectrum_of(const ModelParams& m, const ModeGrid& grid,
                             const std::optional<CouplingSequence>& seq) {
    if (!seq) return ideal_window_spectrum(grid, 1.0, m.delta_w, m.g0, false);
    return coupling_spectrum(seq->with_g0(m.g0), grid);
}

PropagationPlan plan_of(const ScenarioConfig& cfg) {
    PropagationPlan plan;
    plan.t_end = cfg.propagation.t_end;
    plan.dt = cfg.propagation.dt;
    plan.method = cfg.propagation.method;
    plan.snapshot_stride = cfg.propagation.snapshot_stride;
    plan.norm_tol = cfg.propagation.norm_tol;
    plan.snapshot_times = cfg.analysis_times;
    return plan;
}

// Rate of the flat-window model with g_k0 read at k0; NaN below the window edge.
double analytic_rate(const ModelParams& m, const ModeGrid& grid, const CouplingSpectrum& spectrum, bool window) {
    if (!(m.delta > m.delta_w)) return std::numeric_limits<double>::quiet_NaN();
    const double g_k0 = window ? m.g0 : spectrum.magnitude_at(1.0);
    return gamma_two_photon({grid.L_eff(), g_k0, m.delta_w, m.delta, grid.c()});
}

Panel population_panel(const std::string& title, const std::string& file) {
    return {title,
            "t omega_0",
            "population",
            {csv_series(file, "$1", "$2", "P_f"), csv_series(file, "$1", "$3", "P_e"),
             csv_series(file, "$1", "$4", "P_g")}};
}

void run_sweep(const ScenarioConfig& cfg, const fs::path& dir, const RunOptions& opt) {
    const auto grid = grid_of(cfg);
    const auto seq = sequence_of(cfg, dir, opt);
    const auto plan = plan_of(cfg);
    std::vector<SweepRow> rows;
    std::string max_pe = "param,max_P_e\n";
    std::vector<std::string> subdirs;
    for (std::size_t i = 0; i < cfg.sweep.values.size(); ++i) {
        const double v = cfg.sweep.values[i];
        auto m = cfg.model;
        if (cfg.sweep.parameter == "delta") m.delta = v;
        else if (cfg.sweep.parameter == "delta_w") m.delta_w = v;
        else m.g0 = v;
        if (cfg.sweep.fixed_rate) {
            const WindowModelParams unit{grid.L_eff(), 1.0, m.delta_w, m.delta, grid.c()};
            m.g0 = std::pow(*cfg.sweep.fixed_rate / gamma_two_photon(unit), 0.25);
        }
        const auto spectrum = spectrum_of(m, grid, seq);
        const SingleAtomModel model(grid, AtomSpec::from_detuning(m.delta), spectrum);
        const auto traj = propagate(model, initial_f_state(grid.size()), plan, opt.exec);

        const auto name = fmt::format("{:02}_{}_{}", i, cfg.sweep.parameter, v);
        const auto sub = dir / name;
        fs::create_directories(sub);
        subdirs.push_back(name);
        write_population_csv(sub / "populations.csv", traj);
        for (std::size_t n = 0; n < traj.snapshots.size(); ++n)
            write_snapshot(sub / fmt::format("snapshot_{:04}.bin", n), traj.snapshots[n].state,
                           traj.snapshots[n].time);

        const auto fit = fit_decay_rate(traj);
        const double rate = analytic_rate(m, grid, spectrum, !seq);
        if (std::isfinite(rate)) {
            std::string a = "t,P_f\n";
            for (double t : traj.times) a += fmt::format("{},{}\n", t, std::exp(-rate * t));
            write_text(sub / "analytic.csv", a);
        }
        rows.push_back({v, fit.gamma, rate, fit.r_squared});
        max_pe += fmt::format("{},{}\n", v, max_of(traj.pe()));
    }
    write_sweep_csv(dir / "sweep.csv", rows);
    write_text(dir / "max_pe.csv", max_pe);

    if (!opt.plotscript) return;
    const auto param = cfg.sweep.parameter;
    auto decay_panel = [&](std::size_t i) {
        Panel p{fmt::format("{} = {}", param, cfg.sweep.values[i]), "t omega_0", "P_f",
                {csv_series(subdirs[i] + "/populations.csv", "$1", "$2", "numerical")}};
        if (fs::exists(dir / subdirs[i] / "analytic.csv"))
            p.series.push_back(csv_series(subdirs[i] + "/analytic.csv", "$1", "$2", "exp(-Gamma t)", "lines dt 2"));
        return p;
    };
    if (cfg.scenario == "fig4") {
        write_plotscript(dir, {cfg.scenario,
                               1,
                               2,
                               {population_panel(fmt::format("{} = {}", param, cfg.sweep.values[0]),
                                                 subdirs[0] + "/populations.csv"),
                                {"intermediate state", param, "max P_e",
                                 {csv_series("max_pe.csv", "$1", "$2", "max P_e", "linespoints")}}}});
        return;
    }
    Figure fig{cfg.scenario, 2, 2, {}};
    fig.panels.push_back(decay_panel(0));
    fig.panels.push_back(decay_panel(std::min<std::size_t>(2, subdirs.size() - 1)));
    fig.panels.push_back({"decay rate", param, "Gamma / omega_0",
                          {csv_series("sweep.csv", "$1", "$2", "fit", "points pt 7"),
                           csv_series("sweep.csv", "$1", "$3", "window model", "linespoints")}});
    fig.panels.push_back({"fit / model", param, "ratio", {csv_series("sweep.csv", "$1", "$4", "ratio", "linespoints")}});
    write_plotscript(dir, fig);
}

json quadrants_json(const QuadrantFractions& q) {
    return {{"pp", q.pp}, {"pm", q.pm}, {"mp", q.mp}, {"mm", q.mm}, {"axis", q.axis}};
}

void run_single(const ScenarioConfig& cfg, const fs::path& dir, const RunOptions& opt) {
    const auto grid = grid_of(cfg);
    const auto seq = sequence_of(cfg, dir, opt);
    const auto atom = AtomSpec::from_detuning(cfg.model.delta);
    const SingleAtomModel model(grid, atom, spectrum_of(cfg.model, grid, seq));
    const auto traj = propagate(model, initial_f_state(grid.size()), plan_of(cfg), opt.exec);
    write_population_csv(dir / "populations.csv", traj);

    const auto fit = fit_decay_rate(traj);
    json analyses = json::array();
    Figure fig{cfg.scenario, 1, 3, {}};
    for (std::size_t n = 0; n < traj.snapshots.size(); ++n) {
        const auto& snap = traj.snapshots[n];
        const bool requested = std::any_of(cfg.analysis_times.begin(), cfg.analysis_times.end(),
                                           [&](double t) { return std::abs(t - snap.time) <= traj.dt; });
        if (!requested) {
            write_snapshot(dir / fmt::format("snapshot_{:04}.bin", n), snap.state, snap.time);
            continue;
        }
        const auto field = field_of(snap.state);
        const auto x = pair_intensity(field, grid, snap.time);
        const auto k = k_distribution(field, grid, snap.time);
        const auto curve = g2_curve(field, grid, snap.time);
        const auto t = tag(snap.time);
        write_grid(dir / ("x_" + t + ".bin"), x);
        write_grid(dir / ("k_" + t + ".bin"), k);
        write_curve_csv(dir / ("g2_" + t + ".csv"), curve);
        analyses.push_back({{"time", snap.time},
                            {"directionality", directionality(field, grid)},
                            {"quadrants", quadrants_json(quadrant_fractions(field, grid))},
                            {"energy_band_mass", energy_band_mass(field, grid, atom.omega_fg(), 2.0 * cfg.model.delta_w)},
                            {"left_moving_fraction", left_moving_fraction(field, grid)},
                            {"g2_zero", curve.at(0.0)}});
        if (fig.panels.empty()) {
            const Panel xp{fmt::format("two-photon intensity, t = {:g}", snap.time), "x_1 / x_0", "x_2 / x_0",
                           {image_series(dir / ("x_" + t + ".bin"), grid.size(), grid.size(), x.axis_min / x0,
                                         x.axis_step / x0, x.axis_min / x0, x.axis_step / x0)},
                           true};
            const Panel kp{"momentum distribution", "k_1 / k_0", "k_2 / k_0",
                           {image_series(dir / ("k_" + t + ".bin"), grid.size(), grid.size(), k.axis_min,
                                         k.axis_step, k.axis_min, k.axis_step)},
                           true};
            const Panel gp{"second-order correlation", "r / x_0", "g2(r)",
                           {csv_series("g2_" + t + ".csv", "$1/x0", "$2", "g2")}};
            fig.panels = cfg.scenario == "fig8" ? std::vector<Panel>{gp, xp, kp} : std::vector<Panel>{xp, kp, gp};
        }
    }
    const auto pops = populations(traj.final_state);
    write_json(dir / "summary.json", {{"final_populations", {{"f", pops.f}, {"e", pops.e}, {"g", pops.g}}},
                                      {"max_P_e", max_of(traj.pe())},
                                      {"decay_fit", {{"gamma", fit.gamma}, {"r_squared", fit.r_squared},
                                                     {"poor_fit", fit.poor_fit}}},
                                      {"step", traj.dt},
                                      {"analyses", analyses}});
    if (opt.plotscript && !fig.panels.empty()) write_plotscript(dir, fig);
}

CascadePlan cascade_plan(const ScenarioConfig& cfg, double t_end) {
    CascadePlan plan;
    plan.t_end = t_end;
    plan.dt = cfg.propagation.dt;
    plan.method = cfg.propagation.method;
    plan.norm_tol = cfg.propagation.norm_tol;
    return plan;
}

json comparison_json(const CascadeComparison& c) {
    return {{"gamma_r", c.gamma_r},
            {"gamma_fit", c.gamma_fit},
            {"fit_r_squared", c.fit_r_squared},
            {"retardation", c.retardation},
            {"onset_found", c.onset_found},
            {"onset_time", c.onset_time},
            {"me_onset_time", c.me_onset_time},
            {"retardation_estimate", c.retardation_estimate},
            {"peak_b", c.peak_b},
            {"peak_time", c.peak_time},
            {"max_discrepancy", c.max_discrepancy},
            {"left_fraction_after_peak", c.left_fraction_after_peak},
            {"wavepacket_extent", c.wavepacket_extent},
            {"extent_ratio", c.extent_ratio}};
}

Panel cascade_population_panel() {
    return {"populations",
            "t omega_0",
            "population",
            {csv_series("populations.csv", "$1", "$2", "P_A"), csv_series("populations.csv", "$1", "$3", "P_B"),
             csv_series("master_equation.csv", "$1", "$2", "P_A master equation", "lines dt 2"),
             csv_series("master_equation.csv", "$1 + d_s", "$3", "P_B master equation, delayed", "lines dt 2")}};
}

void write_master_equation(const fs::path& dir, const CascadeModel& model, const CascadeTrajectory& traj,
                           double delta_w) {
    const double gamma_r = matched_gamma_right(model, delta_w);
    const auto me = cascaded_master_equation(gamma_r, traj.times, TwoQubitRho::pure(TwoQubitRho::fg, gamma_r));
    std::string csv = "t,P_A,P_B\n";
    for (std::size_t n = 0; n < me.size(); ++n)
        csv += fmt::format("{},{},{}\n", traj.times[n], me[n].population_a(), me[n].population_b());
    write_text(dir / "master_equation.csv", csv);

    const auto cmp = compare_cascade(traj, me, model.separation(), model.grid().c());
    const auto me_fit =
        cascaded_master_equation(cmp.gamma_fit, traj.times, TwoQubitRho::pure(TwoQubitRho::fg, cmp.gamma_fit));
    const auto cmp_fit = compare_cascade(traj, me_fit, model.separation(), model.grid().c());
    write_json(dir / "comparison.json", {{"matched_rate", comparison_json(cmp)}, {"fitted_rate", comparison_json(cmp_fit)}});
}

void run_fig10(const ScenarioConfig& cfg, const fs::path& dir, const RunOptions& opt) {
    const auto grid = grid_of(cfg);
    const auto seq = *sequence_of(cfg, dir, opt);
    const auto model = cascade_model(seq, grid, AtomSpec::from_detuning(cfg.model.delta), cfg.d_s);
    auto plan = cascade_plan(cfg, cfg.propagation.t_end);
    plan.snapshot_stride = cfg.propagation.snapshot_stride;
    plan.snapshot_times = cfg.analysis_times;
    plan.diagonal_stride = cfg.diagonal_stride;
    const auto traj = propagate_cascade(model, initial_a_state(grid.size()), plan, opt.exec);
    write_cascade_population_csv(dir / "populations.csv", traj);
    write_master_equation(dir, model, traj, cfg.model.delta_w);

    Figure fig{cfg.scenario, 1, 3, {cascade_population_panel()}};
    for (const auto& snap : traj.snapshots) {
        const auto field = field_of(snap.state);
        const auto x = pair_intensity(field, grid, snap.time);
        const auto t = tag(snap.time);
        write_grid(dir / ("x_" + t + ".bin"), x);
        write_curve_csv(dir / ("g2_" + t + ".csv"), g2_curve(field, grid, snap.time));
        if (fig.panels.size() == 1)
            fig.panels.push_back({fmt::format("two-photon intensity, t = {:g}", snap.time), "x_1 / x_0", "x_2 / x_0",
                                  {image_series(dir / ("x_" + t + ".bin"), grid.size(), grid.size(), x.axis_min / x0,
                                                x.axis_step / x0, x.axis_min / x0, x.axis_step / x0)},
                                  true});
    }
    if (!traj.diagonal_times.empty()) {
        write_heatmap(dir / "diagonal.bin", traj.diagonal_times, grid.x(0), grid.x_step(), grid.size(), traj.diagonal);
        const double dy = traj.diagonal_times.size() > 1 ? traj.diagonal_times[1] - traj.diagonal_times[0] : 1.0;
        fig.panels.push_back({"field along x_1 = x_2", "x / x_0", "t omega_0",
                              {image_series(dir / "diagonal.bin", grid.size(), traj.diagonal_times.size(),
                                            grid.x(0) / x0, grid.x_step() / x0, traj.diagonal_times.front(), dy)},
                              true});
    }
    fig.preamble = fmt::format("d_s = {:.10g}\n", model.retardation());
    if (opt.plotscript) write_plotscript(dir, fig);
}

// Propagates in segments so that g2(0) can be sampled without holding snapshots.
void run_fig11(const ScenarioConfig& cfg, const fs::path& dir, const RunOptions& opt) {
    const auto grid = grid_of(cfg);
    const auto seq = *sequence_of(cfg, dir, opt);
    const auto model = cascade_model(seq, grid, AtomSpec::from_detuning(cfg.model.delta), cfg.d_s);
    const double t_end = cfg.propagation.t_end;
    const double h = t_end / std::ceil(t_end / cfg.propagation.dt);
    const std::size_t stride = std::max<std::size_t>(cfg.propagation.snapshot_stride, 1);

    std::vector<double> stops;
    for (std::size_t n = stride; static_cast<double>(n) * h < t_end; n += stride) stops.push_back(static_cast<double>(n) * h);
    stops.insert(stops.end(), cfg.analysis_times.begin(), cfg.analysis_times.end());
    stops.push_back(t_end);
    std::sort(stops.begin(), stops.end());
    stops.erase(std::unique(stops.begin(), stops.end(), [&](double a, double b) { return b - a < 1e-9 * t_end; }),
                stops.end());

    CascadeTrajectory all;
    all.grid = grid;
    auto state = initial_a_state(grid.size());
    double t = 0.0;
    std::string g2_zero = "t,g2_0\n";
    std::vector<std::string> curves;
    for (double stop : stops) {
        const auto seg = propagate_cascade(model, state, cascade_plan(cfg, stop - t), opt.exec);
        for (std::size_t n = all.times.empty() ? 0 : 1; n < seg.times.size(); ++n) {
            all.times.push_back(t + seg.times[n]);
            all.populations.push_back(seg.populations[n]);
        }
        all.dt = seg.dt;
        state = seg.final_state;
        t = stop;
        const auto field = field_of(state);
        const auto curve = g2_curve(field, grid, t);
        g2_zero += fmt::format("{},{}\n", t, curve.at(0.0));
        const bool requested = std::any_of(cfg.analysis_times.begin(), cfg.analysis_times.end(),
                                           [&](double a) { return std::abs(a - t) <= 1e-9 * t_end; });
        if (requested) {
            write_curve_csv(dir / ("g2_" + tag(t) + ".csv"), curve);
            write_grid(dir / ("x_" + tag(t) + ".bin"), pair_intensity(field, grid, t));
            curves.push_back("g2_" + tag(t) + ".csv");
        }
    }
    all.final_state = std::move(state);
    write_cascade_population_csv(dir / "populations.csv", all);
    write_text(dir / "g2_zero.csv", g2_zero);

    if (!opt.plotscript) return;
    Panel gp{"second-order correlation", "r / x_0", "g2(r)", {}};
    for (const auto& c : curves) gp.series.push_back(csv_series(c, "$1/x0", "$2", c));
    write_plotscript(dir, {cfg.scenario,
                           1,
                           2,
                           {gp,
                            {"g2(r = 0) over time", "t omega_0", "g2(0)",
                             {csv_series("g2_zero.csv", "$1", "$2", "g2(0)", "linespoints")}, false, true}}});
}

void run_optimize(const ScenarioConfig& cfg, const fs::path& dir, const RunOptions& opt) {
    const auto problem = make_problem(cfg);
    const auto r = problem.chiral ? optimize_chiral(problem, opt.exec) : optimize_bidirectional(problem, opt.exec);
    write_sequence(dir / "sequence.seq", r.sequence.with_g0(1.0), fmt::format("C_m = {}", r.cm_value));

    const ModeGrid grid(problem.grid_modes, problem.k_max);
    const auto spectrum = coupling_spectrum(r.sequence.with_g0(1.0), grid);
    std::string csv = "k,abs_g,target,weight\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double k = grid.k(i);
        const auto tv = problem.target(k);
        const std::string target = tv == TargetValue::dont_care ? "" : fmt::format("{}", problem.target.value(k));
        csv += fmt::format("{},{},{},{}\n", k, std::abs(spectrum.g[i]), target, problem.weight(k));
    }
    write_text(dir / "spectrum.csv", csv);
    write_json(dir / "result.json", {{"cm", r.cm_value},
                                     {"iterations", r.iterations},
                                     {"converged", r.converged},
                                     {"restart_index", r.restart_index},
                                     {"restart_cm", r.restart_cm},
                                     {"initial_cm", r.initial_cm},
                                     {"chiral", problem.chiral},
                                     {"points", r.sequence.size()},
                                     {"extent", r.sequence.extent()}});
    if (opt.plotscript)
        write_plotscript(dir, {cfg.scenario,
                               1,
                               1,
                               {{"coupling spectrum", "k / k_0", "|g_k| / g_0",
                                 {csv_series("spectrum.csv", "$1", "$2", "optimized"),
                                  csv_series("spectrum.csv", "$1", "$3", "target", "lines dt 2")}}}});
}

}  // namespace

void run_scenario(const ScenarioConfig& cfg, const fs::path& dir, const RunOptions& opt) {
    const auto& s = cfg.scenario;
    if (s == "fig2" || s == "fig4" || s == "sweep") return run_sweep(cfg, dir, opt);
    if (s == "fig5" || s == "fig8") return run_single(cfg, dir, opt);
    if (s == "fig10") return run_fig10(cfg, dir, opt);
    if (s == "fig11") return run_fig11(cfg, dir, opt);
    if (s == "optimize") return run_optimize(cfg, dir, opt);
    throw ConfigError(fmt::format("unknown scenario '{}'", s));
}

}  // namespace giantpair::cli
