#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "giantpair/analysis.hpp"
#include "giantpair/error.hpp"
#include "oracles.hpp"

using namespace giantpair;

namespace {

double sum_norm(const std::vector<cplx>& v) {
    double s = 0.0;
    for (const auto& x : v) s += std::norm(x);
    return s;
}

}  // namespace

TEST_CASE("x-space transform: FFT, direct and naive sums agree", "[analysis]") {
    for (std::size_t M : {8u, 10u, 16u}) {
        std::mt19937_64 rng(M);
        const ModeGrid grid(M, 2.0);
        const auto s = oracle::random_state(M, rng);
        const auto f = field_of(s);
        const auto fast = x_wavefunction(f, grid, TransformPath::fast);
        const auto direct = x_wavefunction(f, grid, TransformPath::direct);
        const auto ref = oracle::naive_x_transform(symmetrized_amplitude(f), grid);
        for (std::size_t i = 0; i < M * M; ++i) {
            CHECK(std::abs(fast.values[i] - ref[i]) <= 1e-12);
            CHECK(std::abs(direct.values[i] - ref[i]) <= 1e-12);
        }
        CHECK(fast.axis(0) == grid.x(0));
        CHECK(fast.axis_step == grid.x_step());
        // Unitary transform of the symmetrized amplitude.
        CHECK(std::abs(sum_norm(fast.values) - sum_norm(symmetrized_amplitude(f))) <= 1e-12);
    }
}

TEST_CASE("intensities and densities are normalized", "[analysis]") {
    const std::size_t M = 16;
    const ModeGrid grid(M, 2.0);
    std::mt19937_64 rng(2);
    const auto s = oracle::random_state(M, rng);
    const auto f = field_of(s);
    const auto p = populations(s);
    CHECK(std::abs(pair_intensity(f, grid).total() - p.g) <= 1e-12);
    const auto n = photon_density(f, grid);
    double total = 0.0;
    for (double v : n) total += v;
    CHECK(std::abs(total - (2.0 * p.g + p.e)) <= 1e-12);
    CHECK(std::abs(sum_norm(single_photon_wavefunction(f, grid)) - p.e) <= 1e-12);

    const auto I = k_distribution(f, grid);
    for (std::size_t i = 0; i < M; ++i)
        for (std::size_t j = 0; j < M; ++j) CHECK(I.values[i * M + j] == I.values[j * M + i]);
}

TEST_CASE("two photons in one mode give g2 = 1/2", "[analysis][g2]") {
    const std::size_t M = 32;
    const ModeGrid grid(M, 2.0);
    std::vector<cplx> u(M);
    double nu = 0.0;
    for (std::size_t i = 0; i < M; ++i) {
        u[i] = std::polar(std::exp(-std::pow(grid.k(i) - 0.8, 2) / 0.2), 3.0 * grid.k(i));
        nu += std::norm(u[i]);
    }
    TwoExcState s(M);
    for (std::size_t i = 0; i < M; ++i)
        for (std::size_t j = 0; j < M; ++j) s.g(i, j) = u[i] * u[j] / nu;
    const auto curve = g2_curve(field_of(s), grid);
    REQUIRE(!curve.r.empty());
    for (double g : curve.g2) CHECK(g == Catch::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("g2 is symmetric in the separation", "[analysis][g2]") {
    const std::size_t M = 16;
    const ModeGrid grid(M, 2.0);
    std::mt19937_64 rng(5);
    const auto curve = g2_curve(field_of(oracle::random_state(M, rng)), grid);
    for (std::size_t i = 0; i < curve.r.size(); ++i) {
        const double mirrored = curve.at(-curve.r[i]);
        if (std::abs(curve.r[i]) < 0.5 * grid.L_eff() - 1e-9)
            CHECK(curve.g2[i] == Catch::Approx(mirrored).epsilon(1e-10));
    }
    CHECK(curve.undefined_r.empty());
}

TEST_CASE("empty fields mark every separation undefined", "[analysis][g2]") {
    const ModeGrid grid(8, 2.0);
    const TwoExcState s(8);
    const auto curve = g2_curve(field_of(s), grid);
    CHECK(curve.r.empty());
    CHECK(curve.undefined_r.size() == 8);
}

TEST_CASE("k-space partitions", "[analysis]") {
    const std::size_t M = 20;
    const ModeGrid grid(M, 2.0);
    const std::size_t right = grid.index_of(1.0), right2 = grid.index_of(0.8), left = grid.index_of(-1.0);

    TwoExcState s(M);
    s.g(right, right2) = 1.0;
    CHECK(directionality(field_of(s), grid) == Catch::Approx(1.0));
    CHECK(left_moving_fraction(field_of(s), grid) == 0.0);
    CHECK(energy_band_mass(field_of(s), grid, 1.8, 0.05) == Catch::Approx(1.0));
    CHECK(energy_band_mass(field_of(s), grid, 2.0, 0.05) == 0.0);

    TwoExcState m(M);
    m.g(left, right) = 1.0;
    const auto q = quadrant_fractions(field_of(m), grid);
    CHECK(q.pm == Catch::Approx(0.5));
    CHECK(q.mp == Catch::Approx(0.5));
    CHECK(q.pp + q.mm + q.axis == 0.0);
    CHECK(left_moving_fraction(field_of(m), grid) == Catch::Approx(0.5));

    std::mt19937_64 rng(8);
    const auto r = quadrant_fractions(field_of(oracle::random_state(M, rng)), grid);
    CHECK(r.pp + r.pm + r.mp + r.mm + r.axis == Catch::Approx(1.0));
}

TEST_CASE("diagonal profile reads the pair intensity", "[analysis]") {
    const std::size_t M = 12;
    const ModeGrid grid(M, 2.0);
    std::mt19937_64 rng(4);
    const auto s = oracle::random_state(M, rng);
    const auto I2 = pair_intensity(field_of(s), grid);
    const auto d = diagonal_profile(field_of(s), grid);
    for (std::size_t i = 0; i < M; ++i) CHECK(d[i] == I2.values[i * M + i]);
}

TEST_CASE("grid and curve dumps", "[analysis][io]") {
    const std::size_t M = 8;
    const ModeGrid grid(M, 2.0);
    std::mt19937_64 rng(1);
    const auto s = oracle::random_state(M, rng);
    const auto dir = std::filesystem::temp_directory_path();

    const auto I = pair_intensity(field_of(s), grid, 3.5);
    write_grid(dir / "gp_grid_test.bin", I);
    const auto header = dump_header_bytes(dir / "gp_grid_test.bin");
    CHECK(std::filesystem::file_size(dir / "gp_grid_test.bin") == header + 8 * M * M);
    std::ifstream in(dir / "gp_grid_test.bin", std::ios::binary);
    std::string line;
    std::getline(in, line);
    CHECK(line.find("\"space_tag\":\"x\"") != std::string::npos);
    CHECK(line.find("\"time\":3.5") != std::string::npos);
    std::vector<double> back(M * M);
    in.read(reinterpret_cast<char*>(back.data()), static_cast<std::streamsize>(8 * M * M));
    CHECK(back == I.values);

    const auto A = x_wavefunction(field_of(s), grid);
    write_grid(dir / "gp_amp_test.bin", A);
    CHECK(std::filesystem::file_size(dir / "gp_amp_test.bin") ==
          dump_header_bytes(dir / "gp_amp_test.bin") + 16 * M * M);

    const auto curve = g2_curve(field_of(s), grid, 1.0);
    const auto csv = curve_csv(curve);
    CHECK(csv.rfind("r,g2\n", 0) == 0);
    CHECK(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) == curve.r.size() + 1);

    std::filesystem::remove(dir / "gp_grid_test.bin");
    std::filesystem::remove(dir / "gp_amp_test.bin");
}

TEST_CASE("grid mismatch is rejected", "[analysis]") {
    const TwoExcState s(8);
    CHECK_THROWS_AS(k_distribution(field_of(s), ModeGrid(10, 2.0)), DimensionError);
}
