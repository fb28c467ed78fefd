#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "giantpair/hilbert.hpp"
#include "giantpair/model.hpp"

namespace giantpair {

// Non-owning view of a two-photon field: ordered pair amplitudes on the
// M x M mode grid plus optional single-photon amplitudes (length M).
struct FieldView {
    std::size_t M = 0;
    const cplx* pair = nullptr;
    const cplx* single = nullptr;

    double pair_population() const;
    double single_population() const;
};

FieldView field_of(const TwoExcState& s);

enum class Space { k, x };

struct TwoPhotonAmplitude {
    Space space = Space::k;
    std::size_t M = 0;
    double axis_min = 0.0;
    double axis_step = 0.0;
    double time = 0.0;
    std::vector<cplx> values;  // row-major, first index = coordinate 1

    double axis(std::size_t i) const { return axis_min + static_cast<double>(i) * axis_step; }
};

struct TwoPhotonIntensity {
    Space space = Space::k;
    std::size_t M = 0;
    double axis_min = 0.0;
    double axis_step = 0.0;
    double time = 0.0;
    std::vector<double> values;

    double axis(std::size_t i) const { return axis_min + static_cast<double>(i) * axis_step; }
    double total() const;
};

// (c_ij + c_ji) / sqrt(2); its modulus squared is the symmetrized intensity.
std::vector<cplx> symmetrized_amplitude(const FieldView& f);

// I(k1,k2) = |c(k1,k2) + c(k2,k1)|^2 / 2.
TwoPhotonIntensity k_distribution(const FieldView& f, const ModeGrid& grid, double time = 0.0);

enum class TransformPath { fast, direct };

// psi(x1,x2) = (1/M) sum e^{i k1 x1 + i k2 x2} phi(k1,k2) of the symmetrized
// amplitude phi, on x_n = n L/M - L/2. Unitary, so sum |psi|^2 = sum |phi|^2.
TwoPhotonAmplitude x_wavefunction(const FieldView& f, const ModeGrid& grid,
                                  TransformPath path = TransformPath::fast, double time = 0.0);

// psi_e(x) = M^{-1/2} sum_k e^{i k x} c_e(k).
std::vector<cplx> single_photon_wavefunction(const FieldView& f, const ModeGrid& grid);

// Pair intensity |psi(x1,x2)|^2 rescaled so that it sums to the two-photon
// population sum |c|^2 (symmetrization does not preserve the norm of the
// ordered amplitudes).
TwoPhotonIntensity pair_intensity(const FieldView& f, const ModeGrid& grid, double time = 0.0);

// n(x) = 2 sum_{x2} I2(x, x2) + |psi_e(x)|^2, so sum_x n = 2 P_g + P_e.
std::vector<double> photon_density(const FieldView& f, const ModeGrid& grid);

struct CorrelationCurve {
    double t = 0.0;
    std::vector<double> r;
    std::vector<double> g2;
    std::vector<double> undefined_r;  // separations whose denominator vanished

    double at(double r_value) const;  // value at the nearest defined separation
};

struct G2Options {
    // Separations whose denominator falls below rel_floor * max denominator
    // are reported as undefined.
    double rel_floor = 1e-6;
};

// g2(r) = sum_x N(x+r, x) / sum_x n(x+r) n(x), N = 2 I2, periodic in x,
// r over (-L/2, L/2].
CorrelationCurve g2_curve(const FieldView& f, const ModeGrid& grid, double time = 0.0,
                          const G2Options& opt = {});

struct QuadrantFractions {
    double pp = 0.0;  // k1 > 0, k2 > 0
    double pm = 0.0;  // k1 > 0, k2 < 0
    double mp = 0.0;
    double mm = 0.0;
    double axis = 0.0;  // k1 = 0 or k2 = 0
};

QuadrantFractions quadrant_fractions(const FieldView& f, const ModeGrid& grid);

// Fraction of symmetrized k-space mass with k1 > 0 and k2 > 0.
double directionality(const FieldView& f, const ModeGrid& grid);

// Fraction of k-space mass with |c|k1| + c|k2| - omega_fg| < half_width.
double energy_band_mass(const FieldView& f, const ModeGrid& grid, double omega_fg,
                        double half_width);

// Mean fraction of photons travelling left (k < 0), from the ordered pair amplitudes.
double left_moving_fraction(const FieldView& f, const ModeGrid& grid);

// |psi(x, x)|^2 along the equal-position diagonal.
std::vector<double> diagonal_profile(const FieldView& f, const ModeGrid& grid);

// Grid dump: one JSON header line, then little-endian binary64 values.
void write_grid(const std::filesystem::path& path, const TwoPhotonIntensity& grid);
void write_grid(const std::filesystem::path& path, const TwoPhotonAmplitude& grid);
// Heatmap with rows indexed by `times`, columns by the x axis.
void write_heatmap(const std::filesystem::path& path, const std::vector<double>& times,
                   double axis_min, double axis_step, std::size_t cols,
                   const std::vector<double>& values);

std::string curve_csv(const CorrelationCurve& curve);
void write_curve_csv(const std::filesystem::path& path, const CorrelationCurve& curve);

// Byte length of the header line (including the newline) of a dump file.
std::size_t dump_header_bytes(const std::filesystem::path& path);

}  // namespace giantpair
