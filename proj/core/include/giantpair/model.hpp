#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

namespace giantpair {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;

// Natural units: k0 = omega0 = c = 1 unless overridden; x0 = 2pi/k0.
struct Units {
    double k0 = 1.0;
    double c = 1.0;

    double omega0() const { return c * k0; }
    double x0() const { return 2.0 * pi / k0; }
};

class AtomSpec {
public:
    AtomSpec(double omega_eg, double omega_fe, double omega0 = 1.0);

    // Ladder symmetric about omega0: omega_eg = omega0 + delta, omega_fe = omega0 - delta.
    static AtomSpec from_detuning(double delta, double omega0 = 1.0);

    double omega_eg() const { return omega_eg_; }
    double omega_fe() const { return omega_fe_; }
    double omega_fg() const { return omega_eg_ + omega_fe_; }
    double omega0() const { return 0.5 * omega_fg(); }
    double delta() const { return omega_eg_ - omega0(); }

private:
    double omega_eg_;
    double omega_fe_;
};

// M modes k_i = -k_max + (i+1) dk over (-k_max, k_max], omega_i = c|k_i|.
class ModeGrid {
public:
    ModeGrid() = default;
    ModeGrid(std::size_t M, double k_max, double c = 1.0);

    std::size_t size() const { return k_.size(); }
    double k_max() const { return k_max_; }
    double c() const { return c_; }
    double dk() const { return 2.0 * k_max_ / static_cast<double>(size()); }
    double L_eff() const { return 2.0 * pi / dk(); }

    double k(std::size_t i) const { return k_[i]; }
    double omega(std::size_t i) const { return omega_[i]; }
    const std::vector<double>& k_values() const { return k_; }
    const std::vector<double>& omega_values() const { return omega_; }

    // Index of the grid point nearest to k.
    std::size_t index_of(double k) const;

    // Conjugate real-space axis: x_n = n L/M - L/2.
    double x_step() const { return L_eff() / static_cast<double>(size()); }
    double x(std::size_t n) const { return static_cast<double>(n) * x_step() - 0.5 * L_eff(); }

    bool same_as(const ModeGrid& other) const;

private:
    double k_max_ = 0.0;
    double c_ = 1.0;
    std::vector<double> k_;
    std::vector<double> omega_;
};

ModeGrid build_mode_grid(std::size_t M, double k_max, double c = 1.0);

struct CouplingPoint {
    double x = 0.0;          // position in units of x0
    double amplitude = 0.0;  // A(x) in units of g0
    double theta = 0.0;      // local phase [rad]
};

class CouplingSequence {
public:
    CouplingSequence() = default;
    // Points must already be strictly ascending in x.
    CouplingSequence(std::vector<CouplingPoint> points, double g0, bool chiral);

    // Sorts by position; coincident points are merged into one complex coupling.
    static CouplingSequence from_unsorted(std::vector<CouplingPoint> points, double g0, bool chiral);

    const std::vector<CouplingPoint>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    bool empty() const { return points_.empty(); }
    double g0() const { return g0_; }
    bool chiral() const { return chiral_; }

    CouplingSequence with_g0(double g0) const;
    CouplingSequence translated(double dx) const;
    CouplingSequence with_negated_phases() const;
    double total_amplitude() const;
    double extent() const;  // x_N - x_1 in units of x0

private:
    std::vector<CouplingPoint> points_;
    double g0_ = 1.0;
    bool chiral_ = false;
};

struct CouplingSpectrum {
    ModeGrid grid;
    std::vector<cplx> g;

    std::size_t size() const { return g.size(); }
    double norm() const;
    double magnitude_at(double k) const { return std::abs(g[grid.index_of(k)]); }
};

// g_k = g0 sum_j A_j e^{i theta_j} e^{-i k x_j}, by direct summation.
CouplingSpectrum coupling_spectrum(const CouplingSequence& seq, const ModeGrid& grid,
                                   const Units& units = {});

// Flat window of height g_k0 on omega0 - dw < c|k| < omega0 + dw (k > 0 only when
// directional). Each mode carries the fraction of its cell [k - dk/2, k + dk/2]
// inside the window in |g_k|^2, so the discrete band integral equals the
// continuum one for any grid alignment.
CouplingSpectrum ideal_window_spectrum(const ModeGrid& grid, double omega0, double delta_w,
                                       double g_k0, bool directional);

enum class Band { passband, stopband_fe, stopband_eg, outside };
enum class TargetValue { zero, one, dont_care };

class WindowTarget {
public:
    WindowTarget(const Units& units, const AtomSpec& atom, double delta_w, bool directional);

    // Passband wins where a stop band would overlap it.
    Band band(double k) const;
    TargetValue operator()(double k) const;
    double value(double k) const { return (*this)(k) == TargetValue::one ? 1.0 : 0.0; }

    double delta_w() const { return delta_w_; }
    bool directional() const { return directional_; }
    double omega0() const { return omega0_; }
    double omega_fe() const { return omega_fe_; }
    double omega_eg() const { return omega_eg_; }
    double c() const { return c_; }

private:
    double omega0_;
    double omega_fe_;
    double omega_eg_;
    double delta_w_;
    double c_;
    bool directional_;
};

WindowTarget window_target(const Units& units, const AtomSpec& atom, double delta_w,
                           bool directional);

// Plain-text table: `x_over_x0 amplitude_over_g0 theta_radians`, '#' comments.
// The chiral flag is set when any phase is nonzero.
CouplingSequence parse_sequence(std::string_view text, double g0 = 1.0);
CouplingSequence read_sequence(const std::filesystem::path& path, double g0 = 1.0);
std::string format_sequence(const CouplingSequence& seq, std::string_view comment = {});
void write_sequence(const std::filesystem::path& path, const CouplingSequence& seq,
                    std::string_view comment = {});

}  // namespace giantpair
