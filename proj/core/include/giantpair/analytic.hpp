#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "giantpair/execution.hpp"
#include "giantpair/model.hpp"

namespace giantpair {

// Flat-window model: |g_k| = g_k0 on omega0 - dw < c|k| < omega0 + dw.
struct WindowModelParams {
    double L = 0.0;
    double g_k0 = 0.0;
    double delta_w = 0.0;
    double Delta = 0.0;
    double c = 1.0;
};

// Gamma = 8 L^2 |g_k0|^4 / (pi c^2) * dw / (Delta^2 - dw^2).
double gamma_two_photon(const WindowModelParams& p);
// Right-going share of the flat-window rate, gamma_two_photon / 4.
double gamma_right(const WindowModelParams& p);

struct StarkShift {
    double value = 0.0;
    // Modes with |omega_k - omega_eg| < c dk / 10; they are left out of the sum.
    std::vector<std::size_t> near_pole_modes;
};

// delta_omega_f = sum_k |g_k|^2 / (omega_k - omega_eg).
StarkShift stark_shift(const CouplingSpectrum& spectrum, const ModeGrid& grid, double omega_eg);

struct TimeGrid {
    double dt = 0.1;
    std::size_t count = 0;  // samples t_n = n dt, n < count

    double t(std::size_t n) const { return static_cast<double>(n) * dt; }
};

// Memory-kernel amplitude of |f,0> after eliminating |e,k>:
//   dc/dt = -int_0^t K(t - t') c(t') dt',
//   K(tau) = sum_{k,k'} |g_k|^2 |g_k'|^2 / (omega_k - omega_eg)^2 e^{-i delta_kk' tau},
// delta_kk' = omega_k + omega_k' - omega_fg. K factorizes over k and k', so the
// table costs O(M T); the Volterra stepping is trapezoidal, O(T^2).
std::vector<cplx> reduced_cf(const CouplingSpectrum& spectrum, const ModeGrid& grid,
                             const AtomSpec& atom, const TimeGrid& t_grid,
                             const Execution& exec = {});

struct SweepRow {
    double param = 0.0;
    double gamma_fit = 0.0;
    double gamma_analytic = 0.0;
    double r_squared = 0.0;

    double ratio() const { return gamma_fit / gamma_analytic; }
};

std::string sweep_csv(const std::vector<SweepRow>& rows);
void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);

}  // namespace giantpair
