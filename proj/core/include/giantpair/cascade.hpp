#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "giantpair/analysis.hpp"
#include "giantpair/dynamics.hpp"
#include "giantpair/execution.hpp"
#include "giantpair/model.hpp"

namespace giantpair {

// Two identical giant atoms on a waveguide, B downstream of A by d_s (units of
// x0), exchanging photon pairs through the effective two-photon coupling
//   g_{i,kk'} = g_{i,k} g_{i,k'} / (omega_k - omega_eg),  g_{B,k} = g_{A,k} e^{i k d_s x0}.
class CascadeModel {
public:
    CascadeModel(ModeGrid grid, AtomSpec atom, CouplingSpectrum spectrum_a, double d_s,
                 Units units = {});

    const ModeGrid& grid() const { return grid_; }
    const AtomSpec& atom() const { return atom_; }
    const CouplingSpectrum& spectrum_a() const { return spectrum_a_; }
    CouplingSpectrum spectrum_b() const;
    double d_s() const { return d_s_; }
    double separation() const { return d_s_ * units_.x0(); }
    double retardation() const { return separation() / grid_.c(); }
    std::size_t modes() const { return grid_.size(); }

    // a_k = g_k / (omega_k - omega_eg) and b_k = g_k for atom A; atom B adds e^{i k d}.
    const std::vector<cplx>& pole_factor() const { return a_; }
    const std::vector<cplx>& shift() const { return shift_; }  // e^{i k d}
    cplx coupling(std::size_t atom_index, std::size_t i, std::size_t j) const;

    // delta_kk' = omega_k + omega_k' - omega_fg.
    double detuning(std::size_t i, std::size_t j) const;

private:
    ModeGrid grid_;
    AtomSpec atom_;
    CouplingSpectrum spectrum_a_;
    double d_s_;
    Units units_;
    std::vector<cplx> a_;
    std::vector<cplx> shift_;
};

CascadeModel cascade_model(const CouplingSequence& seq_a, const ModeGrid& grid,
                           const AtomSpec& atom, double d_s, Units units = {});

// Amplitudes on |f_A g_B, 0>, |g_A f_B, 0> and |g g, k k'> (row-major).
struct CascadeState {
    cplx ca{0.0, 0.0};
    cplx cb{0.0, 0.0};
    std::vector<cplx> field;

    CascadeState() = default;
    explicit CascadeState(std::size_t M) : field(M * M) {}

    std::size_t modes() const;
    cplx& f(std::size_t i, std::size_t j) { return field[i * modes() + j]; }
    const cplx& f(std::size_t i, std::size_t j) const { return field[i * modes() + j]; }
};

struct CascadePopulations {
    double a = 0.0;
    double b = 0.0;
    double field = 0.0;

    double total() const { return a + b + field; }
};

CascadePopulations populations(const CascadeState& s);
CascadeState initial_a_state(std::size_t M);

FieldView field_of(const CascadeState& s);

// (H psi)_A = sum g_{A,kk'} c_kk', (H psi)_kk' = delta_kk' c_kk' + conj(g_{A,kk'}) c_A
// + conj(g_{B,kk'}) c_B, atoms at zero energy.
CascadeState apply_cascade_h(const CascadeModel& model, const CascadeState& psi,
                             const Execution& exec = {});

struct CascadePlan {
    double t_end = 500.0;
    double dt = 0.1;  // upper bound, as in PropagationPlan
    std::size_t snapshot_stride = 0;
    std::vector<double> snapshot_times;
    std::size_t diagonal_stride = 0;  // 0: no diagonal heatmap
    Method method = Method::split_step;
    double norm_tol = 1e-8;
};

struct CascadeSnapshot {
    double time = 0.0;
    CascadeState state;
};

struct CascadeTrajectory {
    ModeGrid grid;
    double dt = 0.0;
    std::vector<double> times;
    std::vector<CascadePopulations> populations;
    std::vector<CascadeSnapshot> snapshots;
    std::vector<double> diagonal_times;
    std::vector<double> diagonal;  // row per diagonal time, |psi(x, x)|^2 over the x axis
    CascadeState final_state;

    std::vector<double> pa() const;
    std::vector<double> pb() const;
    std::vector<double> pfield() const;
    const CascadeSnapshot* snapshot_near(double t) const;
};

// Split-step runs in the interaction picture of the field energies; the
// coupling acts on span{A, B, Phi_A, Phi_B} only and its exponential is exact.
CascadeTrajectory propagate_cascade(const CascadeModel& model, const CascadeState& state0,
                                    const CascadePlan& plan, const Execution& exec = {});

std::string cascade_population_csv(const CascadeTrajectory& traj);
void write_cascade_population_csv(const std::filesystem::path& path,
                                  const CascadeTrajectory& traj);

// Two-qubit density matrix over {|gg>, |gf>, |fg>, |ff>}, first label atom A.
struct TwoQubitRho {
    enum Index : std::size_t { gg = 0, gf = 1, fg = 2, ff = 3 };

    double time = 0.0;
    double gamma_r = 0.0;
    std::array<cplx, 16> rho{};

    cplx& at(std::size_t r, std::size_t c) { return rho[4 * r + c]; }
    const cplx& at(std::size_t r, std::size_t c) const { return rho[4 * r + c]; }
    cplx trace() const;
    double population_a() const;
    double population_b() const;

    static TwoQubitRho pure(Index state, double gamma_r = 0.0);
};

struct MasterEquationOptions {
    bool downstream = true;  // false drops every sigma_B term
    std::size_t min_substeps = 4;
    double max_rate_step = 0.01;  // substep h with gamma_R h <= this
    double trace_tol = 1e-6;
};

// d rho/dt = -i H rho + i rho H^dag + L rho L^dag with
// H = -i (G/2)(n_A + n_B) - i G sigma_B^+ sigma_A^-, L = sqrt(G)(sigma_A^- + sigma_B^-).
// rho0 sits at t_grid.front(); returns one matrix per grid time.
std::vector<TwoQubitRho> cascaded_master_equation(double gamma_r,
                                                  const std::vector<double>& t_grid,
                                                  const TwoQubitRho& rho0,
                                                  const MasterEquationOptions& opt = {});

double closed_form_pa(double gamma_r, double t);
double closed_form_pb(double gamma_r, double t);  // (G t)^2 e^{-G t}

// Gamma_R from gamma_right with g_k0 read off atom A's spectrum at k0.
double matched_gamma_right(const CascadeModel& model, double delta_w, Units units = {});

struct CascadeComparison {
    double gamma_r = 0.0;
    double gamma_fit = 0.0;  // log-linear fit of the unitary P_A
    double fit_r_squared = 0.0;
    double retardation = 0.0;  // d_s / c
    double onset_time = 0.0;   // early sqrt(P_B) rise extrapolated to zero
    double me_onset_time = 0.0;
    double retardation_estimate = 0.0;
    double peak_b = 0.0;
    double peak_time = 0.0;
    double max_discrepancy = 0.0;  // unitary P_B vs the master equation shifted by d_s/c
    double left_fraction_after_peak = 0.0;
    double wavepacket_extent = 0.0;  // c / Gamma_R
    double extent_ratio = 0.0;       // extent / separation
    bool onset_found = false;
};

CascadeComparison compare_cascade(const CascadeTrajectory& unitary,
                                  const std::vector<TwoQubitRho>& me, double separation,
                                  double c = 1.0, const FitWindow& fit = {});

}  // namespace giantpair
