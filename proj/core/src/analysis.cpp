#include "giantpair/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fftw3.h>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "binary_io.hpp"
#include "giantpair/error.hpp"

namespace giantpair {

double FieldView::pair_population() const {
    double s = 0.0;
    for (std::size_t i = 0; i < M * M; ++i) s += std::norm(pair[i]);
    return s;
}

double FieldView::single_population() const {
    if (!single) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < M; ++i) s += std::norm(single[i]);
    return s;
}

FieldView field_of(const TwoExcState& s) { return {s.modes(), s.cg.data(), s.ce.data()}; }

double TwoPhotonIntensity::total() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
}

namespace {

void check_view(const FieldView& f, const ModeGrid& grid) {
    if (f.M != grid.size()) throw DimensionError("field and grid mode counts differ");
}

// e^{i k_m x_n} = e^{2 pi i (m + 1 - M/2)(n - M/2) / M}, reduced exactly.
cplx kx_phase(std::size_t m, std::size_t n, std::size_t M) {
    const auto Mi = static_cast<long long>(M);
    const long long a = static_cast<long long>(m) + 1 - Mi / 2;
    const long long b = static_cast<long long>(n) - Mi / 2;
    const long long r = ((a * b) % Mi + Mi) % Mi;
    return std::polar(1.0, 2.0 * pi * static_cast<double>(r) / static_cast<double>(M));
}

void transform_fast(std::vector<cplx>& data, std::size_t M) {
    const auto Mi = static_cast<long long>(M);
    for (std::size_t i = 0; i < M; ++i)
        for (std::size_t j = 0; j < M; ++j)
            if ((i + j) % 2 == 1) data[i * M + j] = -data[i * M + j];
    std::vector<cplx> out(M * M);
    auto* in_ptr = reinterpret_cast<fftw_complex*>(data.data());
    auto* out_ptr = reinterpret_cast<fftw_complex*>(out.data());
    fftw_plan plan = fftw_plan_dft_2d(static_cast<int>(M), static_cast<int>(M), in_ptr, out_ptr,
                                      FFTW_BACKWARD, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
    // Offsets a = 1 - M/2 on the mode index, b = -M/2 on the position index.
    const long long a = 1 - Mi / 2;
    const long long b = -Mi / 2;
    std::vector<cplx> post(M);
    for (std::size_t n = 0; n < M; ++n) {
        const long long r = ((a * (static_cast<long long>(n) + b)) % Mi + Mi) % Mi;
        post[n] = std::polar(1.0, 2.0 * pi * static_cast<double>(r) / static_cast<double>(M));
    }
    const double norm = 1.0 / static_cast<double>(M);
    for (std::size_t i = 0; i < M; ++i)
        for (std::size_t j = 0; j < M; ++j) data[i * M + j] = out[i * M + j] * post[i] * post[j] * norm;
}

void transform_direct(std::vector<cplx>& data, std::size_t M) {
    std::vector<cplx> E(M * M);  // E[n][m] = e^{i k_m x_n} / sqrt(M)
    const double s = 1.0 / std::sqrt(static_cast<double>(M));
    for (std::size_t n = 0; n < M; ++n)
        for (std::size_t m = 0; m < M; ++m) E[n * M + m] = s * kx_phase(m, n, M);
    std::vector<cplx> tmp(M * M, cplx{});
    // Along the second coordinate, then the first.
    for (std::size_t i = 0; i < M; ++i)
        for (std::size_t n = 0; n < M; ++n) {
            cplx acc{};
            for (std::size_t m = 0; m < M; ++m) acc += E[n * M + m] * data[i * M + m];
            tmp[i * M + n] = acc;
        }
    for (std::size_t n1 = 0; n1 < M; ++n1)
        for (std::size_t n2 = 0; n2 < M; ++n2) {
            cplx acc{};
            for (std::size_t m = 0; m < M; ++m) acc += E[n1 * M + m] * tmp[m * M + n2];
            data[n1 * M + n2] = acc;
        }
}

void write_header_and(const std::filesystem::path& path, const nlohmann::json& header,
                      const auto& writer) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(fmt::format("cannot write {}", path.string()));
    out << header.dump() << '\n';
    writer(out);
}

const char* tag(Space s) { return s == Space::k ? "k" : "x"; }

}  // namespace

std::vector<cplx> symmetrized_amplitude(const FieldView& f) {
    const std::size_t M = f.M;
    std::vector<cplx> out(M * M);
    const double s = 1.0 / std::sqrt(2.0);
    for (std::size_t i = 0; i < M; ++i)
        for (std::size_t j = 0; j < M; ++j)
            out[i * M + j] = s * (f.pair[i * M + j] + f.pair[j * M + i]);
    return out;
}

TwoPhotonIntensity k_distribution(const FieldView& f, const ModeGrid& grid, double time) {
    check_view(f, grid);
    const auto phi = symmetrized_amplitude(f);
    TwoPhotonIntensity out{Space::k, f.M, grid.k(0), grid.dk(), time, std::vector<double>(phi.size())};
    for (std::size_t i = 0; i < phi.size(); ++i) out.values[i] = std::norm(phi[i]);
    return out;
}

TwoPhotonAmplitude x_wavefunction(const FieldView& f, const ModeGrid& grid, TransformPath path,
                                  double time) {
    check_view(f, grid);
    TwoPhotonAmplitude out{Space::x, f.M, grid.x(0), grid.x_step(), time, symmetrized_amplitude(f)};
    if (path == TransformPath::fast)
        transform_fast(out.values, f.M);
    else
        transform_direct(out.values, f.M);
    return out;
}

std::vector<cplx> single_photon_wavefunction(const FieldView& f, const ModeGrid& grid) {
    check_view(f, grid);
    const std::size_t M = f.M;
    std::vector<cplx> out(M);
    if (!f.single) return out;
    const double s = 1.0 / std::sqrt(static_cast<double>(M));
    for (std::size_t n = 0; n < M; ++n) {
        cplx acc{};
        for (std::size_t m = 0; m < M; ++m) acc += kx_phase(m, n, M) * f.single[m];
        out[n] = s * acc;
    }
    return out;
}

TwoPhotonIntensity pair_intensity(const FieldView& f, const ModeGrid& grid, double time) {
    const auto psi = x_wavefunction(f, grid, TransformPath::fast, time);
    TwoPhotonIntensity out{Space::x, f.M, psi.axis_min, psi.axis_step, time,
                           std::vector<double>(psi.values.size())};
    double sum = 0.0;
    for (std::size_t i = 0; i < psi.values.size(); ++i) {
        out.values[i] = std::norm(psi.values[i]);
        sum += out.values[i];
    }
    const double pg = f.pair_population();
    const double factor = sum > 0.0 ? pg / sum : 0.0;
    for (auto& v : out.values) v *= factor;
    return out;
}

namespace {

std::vector<double> density_from(const TwoPhotonIntensity& I2, const FieldView& f,
                                 const ModeGrid& grid) {
    const std::size_t M = f.M;
    std::vector<double> n(M, 0.0);
    for (std::size_t i = 0; i < M; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < M; ++j) s += I2.values[i * M + j];
        n[i] = 2.0 * s;
    }
    if (f.single) {
        const auto pe = single_photon_wavefunction(f, grid);
        for (std::size_t i = 0; i < M; ++i) n[i] += std::norm(pe[i]);
    }
    return n;
}

}  // namespace

std::vector<double> photon_density(const FieldView& f, const ModeGrid& grid) {
    check_view(f, grid);
    return density_from(pair_intensity(f, grid), f, grid);
}

double CorrelationCurve::at(double r_value) const {
    if (r.empty()) return std::nan("");
    std::size_t best = 0;
    for (std::size_t i = 1; i < r.size(); ++i)
        if (std::abs(r[i] - r_value) < std::abs(r[best] - r_value)) best = i;
    return g2[best];
}

CorrelationCurve g2_curve(const FieldView& f, const ModeGrid& grid, double time,
                          const G2Options& opt) {
    check_view(f, grid);
    const std::size_t M = f.M;
    const auto I2 = pair_intensity(f, grid, time);
    const auto n = density_from(I2, f, grid);

    // Separation index d = (x1 - x2) mod M.
    std::vector<double> num(M, 0.0), den(M, 0.0);
    for (std::size_t x1 = 0; x1 < M; ++x1)
        for (std::size_t x2 = 0; x2 < M; ++x2) {
            const std::size_t d = (x1 + M - x2) % M;
            num[d] += 2.0 * I2.values[x1 * M + x2];
            den[d] += n[x1] * n[x2];
        }
    const double den_max = *std::max_element(den.begin(), den.end());

    CorrelationCurve curve;
    curve.t = time;
    const auto half = static_cast<long long>(M / 2);
    for (long long s = -half + 1; s <= half; ++s) {
        const auto d = static_cast<std::size_t>((s + static_cast<long long>(M)) %
                                                static_cast<long long>(M));
        const double r = static_cast<double>(s) * grid.x_step();
        if (!(den_max > 0.0) || den[d] <= opt.rel_floor * den_max) {
            curve.undefined_r.push_back(r);
            continue;
        }
        curve.r.push_back(r);
        curve.g2.push_back(num[d] / den[d]);
    }
    return curve;
}

QuadrantFractions quadrant_fractions(const FieldView& f, const ModeGrid& grid) {
    const auto I = k_distribution(f, grid);
    const std::size_t M = f.M;
    QuadrantFractions q;
    const double total = I.total();
    if (!(total > 0.0)) return q;
    for (std::size_t i = 0; i < M; ++i)
        for (std::size_t j = 0; j < M; ++j) {
            const double v = I.values[i * M + j] / total;
            const double k1 = grid.k(i), k2 = grid.k(j);
            if (k1 == 0.0 || k2 == 0.0)
                q.axis += v;
            else if (k1 > 0.0)
                (k2 > 0.0 ? q.pp : q.pm) += v;
            else
                (k2 > 0.0 ? q.mp : q.mm) += v;
        }
    return q;
}

double directionality(const FieldView& f, const ModeGrid& grid) {
    return quadrant_fractions(f, grid).pp;
}

double energy_band_mass(const FieldView& f, const ModeGrid& grid, double omega_fg,
                        double half_width) {
    const auto I = k_distribution(f, grid);
    const std::size_t M = f.M;
    double in = 0.0;
    for (std::size_t i = 0; i < M; ++i)
        for (std::size_t j = 0; j < M; ++j)
            if (std::abs(grid.omega(i) + grid.omega(j) - omega_fg) < half_width)
                in += I.values[i * M + j];
    const double total = I.total();
    return total > 0.0 ? in / total : 0.0;
}

double left_moving_fraction(const FieldView& f, const ModeGrid& grid) {
    check_view(f, grid);
    const std::size_t M = f.M;
    double left = 0.0, total = 0.0;
    for (std::size_t i = 0; i < M; ++i)
        for (std::size_t j = 0; j < M; ++j) {
            const double p = std::norm(f.pair[i * M + j]);
            total += 2.0 * p;
            left += p * ((grid.k(i) < 0.0 ? 1.0 : 0.0) + (grid.k(j) < 0.0 ? 1.0 : 0.0));
        }
    return total > 0.0 ? left / total : 0.0;
}

std::vector<double> diagonal_profile(const FieldView& f, const ModeGrid& grid) {
    const auto I2 = pair_intensity(f, grid);
    std::vector<double> out(f.M);
    for (std::size_t i = 0; i < f.M; ++i) out[i] = I2.values[i * f.M + i];
    return out;
}

void write_grid(const std::filesystem::path& path, const TwoPhotonIntensity& g) {
    const nlohmann::json header = {{"M", g.M},          {"space_tag", tag(g.space)},
                                   {"time", g.time},    {"axis_min", g.axis_min},
                                   {"axis_step", g.axis_step}, {"dtype", "float64-le"}};
    write_header_and(path, header, [&](std::ostream& out) { detail::put_real(out, g.values); });
}

void write_grid(const std::filesystem::path& path, const TwoPhotonAmplitude& g) {
    const nlohmann::json header = {{"M", g.M},          {"space_tag", tag(g.space)},
                                   {"time", g.time},    {"axis_min", g.axis_min},
                                   {"axis_step", g.axis_step},
                                   {"dtype", "complex128-le-interleaved"}};
    write_header_and(path, header, [&](std::ostream& out) { detail::put_complex(out, g.values); });
}

void write_heatmap(const std::filesystem::path& path, const std::vector<double>& times,
                   double axis_min, double axis_step, std::size_t cols,
                   const std::vector<double>& values) {
    if (values.size() != times.size() * cols) throw DimensionError("heatmap shape mismatch");
    const nlohmann::json header = {{"M", cols},           {"rows", times.size()},
                                   {"space_tag", "x-t"},  {"axis_min", axis_min},
                                   {"axis_step", axis_step}, {"times", times},
                                   {"dtype", "float64-le"}};
    write_header_and(path, header, [&](std::ostream& out) { detail::put_real(out, values); });
}

std::string curve_csv(const CorrelationCurve& curve) {
    std::string out = "r,g2\n";
    for (std::size_t i = 0; i < curve.r.size(); ++i)
        out += fmt::format("{},{}\n", curve.r[i], curve.g2[i]);
    return out;
}

void write_curve_csv(const std::filesystem::path& path, const CorrelationCurve& curve) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(fmt::format("cannot write {}", path.string()));
    out << curve_csv(curve);
}

std::size_t dump_header_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::string line;
    std::getline(in, line);
    return line.size() + 1;
}

}  // namespace giantpair
