#include <catch_amalgamated.hpp>

#include <cmath>

#include "giantpair/cascade.hpp"
#include "giantpair/error.hpp"
#include "oracles.hpp"

using namespace giantpair;

namespace {

// Small grid with omega_eg = 1.125 midway between modes.
CascadeModel small_cascade(std::size_t M, double d_s, std::uint64_t seed, double g0 = 0.05) {
    std::mt19937_64 rng(seed);
    const ModeGrid grid(M, 2.0);
    const auto seq = oracle::random_sequence(5, true, rng).with_g0(g0);
    return cascade_model(seq, grid, AtomSpec::from_detuning(0.125), d_s);
}

double rel_error(const Eigen::VectorXcd& got, const Eigen::VectorXcd& ref) {
    return (got - ref).norm() / ref.norm();
}

}  // namespace

TEST_CASE("matrix-free cascade H equals the dense matrix", "[cascade]") {
    for (double d_s : {0.0, 3.0, 40.0}) {
        const auto model = small_cascade(16, d_s, 2);
        const Eigen::MatrixXcd H = oracle::cascade_h(model);
        std::mt19937_64 rng(5);
        for (int trial = 0; trial < 3; ++trial) {
            const auto psi = oracle::random_cascade_state(16, rng);
            const Eigen::VectorXcd ref = H * oracle::to_vector(psi);
            CHECK(rel_error(oracle::to_vector(apply_cascade_h(model, psi)), ref) <= 1e-12);
        }
    }
}

TEST_CASE("cascade couplings", "[cascade]") {
    const auto model = small_cascade(16, 7.5, 3);
    const auto gb = model.spectrum_b();
    for (std::size_t i = 0; i < 16; ++i) {
        CHECK(std::abs(std::abs(gb.g[i]) - std::abs(model.spectrum_a().g[i])) < 1e-15);
        for (std::size_t j = 0; j < 16; ++j) {
            const auto& g = model.spectrum_a().g;
            const cplx gA = g[i] * g[j] / (model.grid().omega(i) - model.atom().omega_eg());
            CHECK(std::abs(model.coupling(0, i, j) - gA) <= 1e-14 * (1.0 + std::abs(gA)));
            CHECK(std::abs(model.coupling(1, i, j) - gb.g[i] * gb.g[j] /
                                                         (model.grid().omega(i) - model.atom().omega_eg())) <=
                  1e-14 * (1.0 + std::abs(gA)));
        }
    }
}

TEST_CASE("cascade H is Hermitian", "[cascade]") {
    const auto model = small_cascade(10, 2.0, 4);
    std::mt19937_64 rng(6);
    const auto a = oracle::random_cascade_state(10, rng);
    const auto b = oracle::random_cascade_state(10, rng);
    auto dot = [](const CascadeState& x, const CascadeState& y) {
        return oracle::to_vector(x).dot(oracle::to_vector(y));
    };
    CHECK(std::abs(dot(a, apply_cascade_h(model, b)) - std::conj(dot(b, apply_cascade_h(model, a)))) <= 1e-12);
}

TEST_CASE("cascade split-step and rk4 match the dense exponential", "[cascade]") {
    const std::size_t M = 16;
    const auto model = small_cascade(M, 4.0, 8, 0.04);
    const oracle::Propagator U(oracle::cascade_h(model));
    std::mt19937_64 rng(10);
    for (bool random_start : {false, true}) {
        const auto psi0 = random_start ? oracle::random_cascade_state(M, rng) : initial_a_state(M);
        const auto v0 = oracle::to_vector(psi0);
        for (Method method : {Method::split_step, Method::rk4}) {
            CascadePlan plan;
            plan.t_end = 50.0;
            plan.dt = 0.005;
            plan.method = method;
            plan.snapshot_times = {25.0, 50.0};
            const auto traj = propagate_cascade(model, psi0, plan);
            INFO(to_string(method) << " random=" << random_start);
            double worst = 0.0;
            for (std::size_t n = 0; n < traj.times.size(); n += 100) {
                const auto ref = populations(oracle::to_cascade(U(v0, traj.times[n]), M));
                const auto& p = traj.populations[n];
                worst = std::max({worst, std::abs(p.a - ref.a), std::abs(p.b - ref.b),
                                  std::abs(p.field - ref.field)});
            }
            CHECK(worst <= 1e-6);
            REQUIRE(traj.snapshots.size() == 2);
            CHECK(oracle::max_abs_diff(oracle::to_vector(traj.snapshots[1].state), U(v0, 50.0)) <= 1e-6);
            CHECK(oracle::max_abs_diff(oracle::to_vector(traj.final_state), U(v0, 50.0)) <= 1e-6);
        }
    }
}

TEST_CASE("coincident atoms: the antisymmetric combination is dark", "[cascade]") {
    const auto model = small_cascade(12, 0.0, 12, 0.1);
    CascadeState psi(12);
    psi.ca = 1.0 / std::sqrt(2.0);
    psi.cb = -1.0 / std::sqrt(2.0);
    const auto hpsi = apply_cascade_h(model, psi);
    CHECK(std::abs(hpsi.ca) + std::abs(hpsi.cb) == 0.0);
    for (const auto& v : hpsi.field) CHECK(std::abs(v) <= 1e-15);

    CascadePlan plan;
    plan.t_end = 40.0;
    const auto traj = propagate_cascade(model, psi, plan);
    CHECK(std::abs(traj.populations.back().a - 0.5) <= 1e-12);
    CHECK(std::abs(traj.populations.back().b - 0.5) <= 1e-12);
}

TEST_CASE("zero coupling keeps atom A excited", "[cascade]") {
    const ModeGrid grid(10, 2.0);
    const CascadeModel model(grid, AtomSpec::from_detuning(0.2),
                             CouplingSpectrum{grid, std::vector<cplx>(10)}, 5.0);
    CascadePlan plan;
    plan.t_end = 20.0;
    const auto traj = propagate_cascade(model, initial_a_state(10), plan);
    for (double pa : traj.pa()) CHECK(pa == 1.0);
}

TEST_CASE("coupled modes on the intermediate pole are rejected", "[cascade]") {
    const ModeGrid grid(400, 2.0);  // k = 1.15 is a grid point
    CouplingSpectrum flat{grid, std::vector<cplx>(400, cplx{0.01, 0.0})};
    CHECK_THROWS_AS(CascadeModel(grid, AtomSpec::from_detuning(0.15), flat, 40.0), PoleError);
    const ModeGrid shifted(500, 2.0);
    CouplingSpectrum flat500{shifted, std::vector<cplx>(500, cplx{0.01, 0.0})};
    CHECK_NOTHROW(CascadeModel(shifted, AtomSpec::from_detuning(0.15), flat500, 40.0));
}

TEST_CASE("master equation follows the cascaded closed form", "[cascade][master]") {
    const double G = 0.05;
    std::vector<double> t;
    for (int n = 0; n <= 400; ++n) t.push_back(0.5 * n);
    const auto rho = cascaded_master_equation(G, t, TwoQubitRho::pure(TwoQubitRho::fg, G));
    REQUIRE(rho.size() == t.size());
    double err = 0.0;
    for (const auto& r : rho) {
        err = std::max(err, std::abs(r.population_a() - closed_form_pa(G, r.time)));
        err = std::max(err, std::abs(r.population_b() - closed_form_pb(G, r.time)));
        CHECK(std::abs(r.trace() - 1.0) <= 1e-9);
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j) CHECK(std::abs(r.at(i, j) - std::conj(r.at(j, i))) <= 1e-12);
    }
    CHECK(err <= 1e-6);
    for (std::size_t n = 1; n < rho.size(); ++n) CHECK(rho[n].population_a() <= rho[n - 1].population_a());
}

TEST_CASE("closed-form P_B peaks at 2/Gamma with 4 e^-2", "[cascade][master]") {
    const double G = 0.02;
    double best = 0.0, t_best = 0.0;
    for (int n = 0; n <= 40000; ++n) {
        const double tt = 0.01 * n;
        if (closed_form_pb(G, tt) > best) {
            best = closed_form_pb(G, tt);
            t_best = tt;
        }
    }
    CHECK(std::abs(t_best - 2.0 / G) <= 0.01);
    CHECK(std::abs(best - 4.0 * std::exp(-2.0)) <= 1e-9);
    CHECK(std::abs(best - 0.541) <= 5e-4);

    // Early times: P_B ~ (G t)^2 from the integrator itself.
    const auto rho = cascaded_master_equation(G, {0.0, 0.1, 0.2}, TwoQubitRho::pure(TwoQubitRho::fg, G));
    for (const auto& r : rho)
        if (r.time > 0.0) CHECK(std::abs(r.population_b() / std::pow(G * r.time, 2) - 1.0) <= 5e-3);
}

TEST_CASE("ground state is stationary and A ignores B", "[cascade][master]") {
    const double G = 0.1;
    const std::vector<double> t{0.0, 5.0, 10.0, 50.0};
    for (const auto& r : cascaded_master_equation(G, t, TwoQubitRho::pure(TwoQubitRho::gg, G)))
        for (std::size_t i = 0; i < 16; ++i)
            CHECK(std::abs(r.rho[i] - TwoQubitRho::pure(TwoQubitRho::gg).rho[i]) == 0.0);

    MasterEquationOptions off;
    off.downstream = false;
    const auto with_b = cascaded_master_equation(G, t, TwoQubitRho::pure(TwoQubitRho::ff, G));
    const auto without_b = cascaded_master_equation(G, t, TwoQubitRho::pure(TwoQubitRho::ff, G), off);
    for (std::size_t n = 0; n < t.size(); ++n)
        CHECK(std::abs(with_b[n].population_a() - without_b[n].population_a()) <= 1e-12);

    CHECK_THROWS_AS(cascaded_master_equation(0.0, t, TwoQubitRho::pure(TwoQubitRho::fg)), ConfigError);
}

TEST_CASE("comparison report on trivial inputs", "[cascade]") {
    const ModeGrid grid(10, 2.0);
    const CascadeModel model(grid, AtomSpec::from_detuning(0.2),
                             CouplingSpectrum{grid, std::vector<cplx>(10)}, 5.0);
    CascadePlan plan;
    plan.t_end = 50.0;
    const auto traj = propagate_cascade(model, initial_a_state(10), plan);
    const auto me = cascaded_master_equation(1e-9, traj.times, TwoQubitRho::pure(TwoQubitRho::fg, 1e-9));
    const auto r = compare_cascade(traj, me, model.separation());
    CHECK(r.max_discrepancy <= 1e-12);
    CHECK(r.retardation == Catch::Approx(5.0 * 2.0 * pi));
}

TEST_CASE("population CSV for the cascade", "[cascade][io]") {
    const auto model = small_cascade(8, 1.0, 1);
    CascadePlan plan;
    plan.t_end = 1.0;
    plan.dt = 0.5;
    const auto csv = cascade_population_csv(propagate_cascade(model, initial_a_state(8), plan));
    CHECK(csv.rfind("t,P_A,P_B,P_field\n0,1,0,0\n", 0) == 0);
}
