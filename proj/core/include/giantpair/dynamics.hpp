#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "giantpair/hilbert.hpp"

namespace giantpair {

enum class Method { rk4, split_step };

Method parse_method(const std::string& name);
std::string to_string(Method m);

struct PropagationPlan {
    double t_end = 100.0;
    // Upper bound on the step; the run uses t_end / ceil(t_end / dt).
    double dt = 0.1;
    std::size_t snapshot_stride = 0;  // 0: no periodic snapshots
    std::vector<double> snapshot_times;
    Method method = Method::split_step;
    double norm_tol = 1e-8;
    std::size_t energy_stride = 0;  // 0: no energy tracking
};

struct Trajectory {
    double dt = 0.0;
    std::vector<double> times;
    std::vector<Populations> populations;
    std::vector<double> energy_times;
    std::vector<double> energies;
    std::vector<Snapshot> snapshots;
    TwoExcState final_state;

    std::vector<double> pf() const;
    std::vector<double> pe() const;
    std::vector<double> pg() const;
    const Snapshot* snapshot_near(double t) const;
};

// Split-step: Strang splitting of exp(-i D dt) with the exact exponential of
// the coupling part, which only mixes |f>, the g-weighted e amplitude and the
// g-weighted pair amplitude. Unitary to rounding at any dt; the splitting
// error is set by dt times the detunings of the coupled states.
Trajectory propagate(const SingleAtomModel& model, const TwoExcState& state0,
                     const PropagationPlan& plan, const Execution& exec = {});

// Advances `psi` by `steps` steps of signed size dt without recording anything.
void evolve(const SingleAtomModel& model, TwoExcState& psi, double dt, std::size_t steps,
            Method method, const Execution& exec = {});

struct FitWindow {
    double t_min = 5.0;
    double p_floor = 1e-3;
    // Relative rebound of P_f above its running minimum tolerated before the
    // fit is flagged as poor.
    double oscillation_tol = 0.05;
};

struct DecayFit {
    double gamma = 0.0;
    double intercept = 0.0;
    double r_squared = 1.0;
    std::size_t points = 0;
    bool poor_fit = false;
};

DecayFit fit_decay_rate(std::span<const double> t, std::span<const double> p,
                        const FitWindow& window = {});
DecayFit fit_decay_rate(const Trajectory& traj, const FitWindow& window = {});

std::string population_csv(const Trajectory& traj);
void write_population_csv(const std::filesystem::path& path, const Trajectory& traj);

}  // namespace giantpair
