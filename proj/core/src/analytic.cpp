#include "giantpair/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "giantpair/error.hpp"

namespace giantpair {

namespace {

void check_window(const WindowModelParams& p) {
    if (!(p.L > 0.0) || !(p.g_k0 > 0.0) || !(p.delta_w > 0.0) || !(p.c > 0.0))
        throw ConfigError("window parameters L, g_k0, delta_w and c must be positive");
    if (!(p.Delta > p.delta_w))
        throw PoleError(fmt::format("detuning {} must exceed the window half-width {}", p.Delta,
                                    p.delta_w));
}

double window_rate(const WindowModelParams& p, double prefactor) {
    check_window(p);
    const double g2 = p.g_k0 * p.g_k0;
    return prefactor * p.L * p.L * g2 * g2 / (pi * p.c * p.c) * p.delta_w /
           (p.Delta * p.Delta - p.delta_w * p.delta_w);
}

}  // namespace

double gamma_two_photon(const WindowModelParams& p) { return window_rate(p, 8.0); }

double gamma_right(const WindowModelParams& p) { return window_rate(p, 2.0); }

StarkShift stark_shift(const CouplingSpectrum& spectrum, const ModeGrid& grid, double omega_eg) {
    if (spectrum.g.size() != grid.size()) throw DimensionError("spectrum and grid sizes differ");
    StarkShift out;
    const double guard = grid.dk() * grid.c() / 10.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double det = grid.omega(i) - omega_eg;
        if (std::abs(det) < guard) {
            out.near_pole_modes.push_back(i);
            continue;
        }
        out.value += std::norm(spectrum.g[i]) / det;
    }
    return out;
}

std::vector<cplx> reduced_cf(const CouplingSpectrum& spectrum, const ModeGrid& grid,
                             const AtomSpec& atom, const TimeGrid& t_grid, const Execution& exec) {
    const std::size_t M = grid.size();
    if (spectrum.g.size() != M) throw DimensionError("spectrum and grid sizes differ");
    if (!(t_grid.dt > 0.0)) throw ConfigError("time grid step must be positive");
    const std::size_t T = t_grid.count;
    std::vector<cplx> c(T);
    if (T == 0) return c;

    std::vector<double> wa, wb;  // |g|^2/(w - w_eg)^2 and |g|^2
    std::vector<double> w;
    const double guard = grid.dk() * grid.c() / 10.0;
    double wmin = 1e300, wmax = -1e300;
    for (std::size_t i = 0; i < M; ++i) {
        const double g2 = std::norm(spectrum.g[i]);
        if (g2 == 0.0) continue;
        const double det = grid.omega(i) - atom.omega_eg();
        if (std::abs(det) < guard)
            throw PoleError(fmt::format("mode {} sits on the intermediate-state pole", i));
        w.push_back(grid.omega(i));
        wa.push_back(g2 / (det * det));
        wb.push_back(g2);
        wmin = std::min(wmin, grid.omega(i));
        wmax = std::max(wmax, grid.omega(i));
    }
    c[0] = 1.0;
    if (w.empty()) {
        std::fill(c.begin(), c.end(), cplx{1.0, 0.0});
        return c;
    }
    const double w_fg = atom.omega_fg();
    const double max_det = std::max(std::abs(2.0 * wmax - w_fg), std::abs(2.0 * wmin - w_fg));
    if (t_grid.dt * max_det > 0.5)
        throw ResolutionError(fmt::format(
            "time step {} too coarse: dt * max|delta_kk'| = {:.3g} > 0.5", t_grid.dt,
            t_grid.dt * max_det));

    std::vector<cplx> K(T);
    const auto nT = static_cast<std::ptrdiff_t>(T);
    const int threads = worker_count(exec);
#pragma omp parallel for schedule(static) num_threads(threads) if (threads > 1)
    for (std::ptrdiff_t nn = 0; nn < nT; ++nn) {
        const double tau = t_grid.t(static_cast<std::size_t>(nn));
        cplx a{0.0, 0.0}, b{0.0, 0.0};
        for (std::size_t i = 0; i < w.size(); ++i) {
            const cplx ph = std::polar(1.0, -w[i] * tau);
            a += wa[i] * ph;
            b += wb[i] * ph;
        }
        K[static_cast<std::size_t>(nn)] = std::polar(1.0, w_fg * tau) * a * b;
    }

    const double h = t_grid.dt;
    const cplx lhs = 1.0 + 0.25 * h * h * K[0];
    cplx I_prev{0.0, 0.0};
    for (std::size_t n = 1; n < T; ++n) {
        cplx S = 0.5 * K[n] * c[0];
        for (std::size_t m = 1; m < n; ++m) S += K[n - m] * c[m];
        S *= h;
        c[n] = (c[n - 1] - 0.5 * h * (I_prev + S)) / lhs;
        I_prev = S + 0.5 * h * K[0] * c[n];
    }
    return c;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = "param,Gamma_fit,Gamma_analytic,ratio,r_squared\n";
    for (const auto& r : rows)
        out += fmt::format("{},{},{},{},{}\n", r.param, r.gamma_fit, r.gamma_analytic, r.ratio(),
                           r.r_squared);
    return out;
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(fmt::format("cannot write {}", path.string()));
    out << sweep_csv(rows);
}

}  // namespace giantpair
