#include <benchmark/benchmark.h>

#include <vector>

#include "giantpair/analysis.hpp"
#include "giantpair/cascade.hpp"
#include "giantpair/dynamics.hpp"
#include "giantpair/hilbert.hpp"
#include "giantpair/optimizer.hpp"

using namespace giantpair;

namespace {

SingleAtomModel table1_model(std::size_t M) {
    const ModeGrid grid(M, 2.0);
    return {grid, AtomSpec::from_detuning(0.15), coupling_spectrum(load_table_sequence(TableId::table1, 0.0085), grid)};
}

// State after a short decay, so every block carries weight.
TwoExcState warm_state(const SingleAtomModel& model) {
    auto psi = initial_f_state(model.modes());
    evolve(model, psi, 0.1, 100, Method::split_step, Execution::serial());
    return psi;
}

void BM_apply_h(benchmark::State& st) {
    const auto model = table1_model(static_cast<std::size_t>(st.range(0)));
    const auto psi = warm_state(model);
    TwoExcState out(model.modes());
    const auto exec = Execution::serial();
    for (auto _ : st) {
        apply_h(model, psi, out, exec);
        benchmark::DoNotOptimize(out.cf);
    }
    st.SetItemsProcessed(st.iterations() * st.range(0) * st.range(0));
}
BENCHMARK(BM_apply_h)->Arg(200)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_step(benchmark::State& st) {
    const auto model = table1_model(static_cast<std::size_t>(st.range(0)));
    auto psi = warm_state(model);
    const auto method = st.range(1) ? Method::rk4 : Method::split_step;
    // rk4 is only stable for dt * max diagonal well below one.
    const double dt = method == Method::rk4 ? 0.02 : 0.1;
    const auto exec = Execution::serial();
    for (auto _ : st) evolve(model, psi, dt, 1, method, exec);
    st.SetLabel(to_string(method));
}
BENCHMARK(BM_step)->Args({200, 0})->Args({500, 0})->Args({200, 1})->Args({500, 1})->Unit(benchmark::kMillisecond);

void BM_x_wavefunction(benchmark::State& st) {
    const auto model = table1_model(static_cast<std::size_t>(st.range(0)));
    const auto psi = warm_state(model);
    const auto path = st.range(1) ? TransformPath::direct : TransformPath::fast;
    for (auto _ : st) {
        auto x = x_wavefunction(field_of(psi), model.grid(), path);
        benchmark::DoNotOptimize(x.values.data());
    }
    st.SetLabel(path == TransformPath::fast ? "fft" : "direct");
}
BENCHMARK(BM_x_wavefunction)->Args({128, 0})->Args({128, 1})->Args({500, 0})->Unit(benchmark::kMillisecond);

void BM_g2_curve(benchmark::State& st) {
    const auto model = table1_model(static_cast<std::size_t>(st.range(0)));
    const auto psi = warm_state(model);
    for (auto _ : st) {
        auto c = g2_curve(field_of(psi), model.grid());
        benchmark::DoNotOptimize(c.g2.data());
    }
}
BENCHMARK(BM_g2_curve)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_apply_cascade_h(benchmark::State& st) {
    const auto M = static_cast<std::size_t>(st.range(0));
    const ModeGrid grid(M, 2.0);
    const auto model = cascade_model(load_table_sequence(TableId::table2, 0.011), grid, AtomSpec::from_detuning(0.15), 40.0);
    CascadePlan plan;
    plan.t_end = 10.0;
    const auto psi = propagate_cascade(model, initial_a_state(M), plan, Execution::serial()).final_state;
    const auto exec = Execution::serial();
    for (auto _ : st) {
        auto out = apply_cascade_h(model, psi, exec);
        benchmark::DoNotOptimize(out.ca);
    }
}
BENCHMARK(BM_apply_cascade_h)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_objective_gradient(benchmark::State& st) {
    const auto problem = paper_problem(st.range(0) != 0);
    const SpectralObjective f(problem);
    const auto vars = f.pack(load_table_sequence(st.range(0) ? TableId::table2 : TableId::table1));
    std::vector<double> grad(vars.size());
    for (auto _ : st) benchmark::DoNotOptimize(f.value_and_gradient(vars, 1e-3, grad));
    st.SetLabel(st.range(0) ? "chiral" : "bidirectional");
}
BENCHMARK(BM_objective_gradient)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
