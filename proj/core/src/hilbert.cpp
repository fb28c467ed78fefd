#include "giantpair/hilbert.hpp"

#include <algorithm>
#include <fstream>
#include <string>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "binary_io.hpp"
#include "giantpair/error.hpp"
#include "kernels.hpp"

namespace giantpair {

Populations populations(const TwoExcState& s) {
    Populations p;
    p.f = std::norm(s.cf);
    for (const auto& v : s.ce) p.e += std::norm(v);
    for (const auto& v : s.cg) p.g += std::norm(v);
    return p;
}

double norm_squared(const TwoExcState& s) { return populations(s).total(); }

cplx inner(const TwoExcState& a, const TwoExcState& b) {
    if (a.modes() != b.modes()) throw DimensionError("inner product of states with different M");
    cplx acc = std::conj(a.cf) * b.cf;
    for (std::size_t i = 0; i < a.ce.size(); ++i) acc += std::conj(a.ce[i]) * b.ce[i];
    for (std::size_t i = 0; i < a.cg.size(); ++i) acc += std::conj(a.cg[i]) * b.cg[i];
    return acc;
}

void scale(TwoExcState& s, cplx factor) {
    s.cf *= factor;
    for (auto& v : s.ce) v *= factor;
    for (auto& v : s.cg) v *= factor;
}

void axpy(cplx alpha, const TwoExcState& x, TwoExcState& y) {
    if (x.modes() != y.modes()) throw DimensionError("axpy on states with different M");
    y.cf += alpha * x.cf;
    for (std::size_t i = 0; i < x.ce.size(); ++i) y.ce[i] += alpha * x.ce[i];
    for (std::size_t i = 0; i < x.cg.size(); ++i) y.cg[i] += alpha * x.cg[i];
}

TwoExcState initial_f_state(std::size_t M) {
    if (M < 1) throw DimensionError("initial state needs at least one mode");
    TwoExcState s(M);
    s.cf = 1.0;
    return s;
}

SingleAtomModel::SingleAtomModel(ModeGrid grid, AtomSpec atom, CouplingSpectrum spectrum)
    : grid_(std::move(grid)), atom_(atom), spectrum_(std::move(spectrum)) {
    if (!spectrum_.grid.same_as(grid_) || spectrum_.g.size() != grid_.size())
        throw DimensionError("coupling spectrum was built on a different mode grid");
}

double SingleAtomModel::max_diagonal() const {
    const auto& w = grid_.omega_values();
    const double wmax = *std::max_element(w.begin(), w.end());
    return std::max({omega_f(), 2.0 * wmax, wmax + atom_.omega_eg()});
}

namespace detail {

AtomCouplings couplings_of(const SingleAtomModel& model) {
    return {model.grid().omega_values(), model.spectrum().g, model.atom().omega_eg(),
            model.omega_f()};
}

void apply_h_raw(const AtomCouplings& c, const TwoExcState& psi, TwoExcState& out, int threads) {
    const std::size_t M = c.size();
    if (out.modes() != M || out.cg.size() != M * M) out = TwoExcState(M);
    const cplx* g = c.g.data();
    const double* w = c.w.data();
    const cplx* cg = psi.cg.data();
    cplx* hg = out.cg.data();
    const auto n = static_cast<std::ptrdiff_t>(M);

#pragma omp parallel for schedule(static) num_threads(threads) if (threads > 1)
    for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const cplx* row = cg + i * M;
        cplx* hrow = hg + i * M;
        const cplx ei = psi.ce[i];
        const double wi = w[i];
        cplx dot{0.0, 0.0};
        for (std::size_t j = 0; j < M; ++j) {
            dot += g[j] * row[j];
            hrow[j] = std::conj(g[j]) * ei + (wi + w[j]) * row[j];
        }
        out.ce[i] = std::conj(g[i]) * psi.cf + (wi + c.w_eg) * ei + dot;
    }

    cplx hf = c.w_fg * psi.cf;
    for (std::size_t i = 0; i < M; ++i) hf += g[i] * psi.ce[i];
    out.cf = hf;
}

}  // namespace detail

void apply_h(const SingleAtomModel& model, const TwoExcState& psi, TwoExcState& out,
             const Execution& exec) {
    const std::size_t M = model.modes();
    if (psi.modes() != M || psi.cg.size() != M * M)
        throw DimensionError(fmt::format("state has {} modes, model has {}", psi.modes(), M));
    detail::apply_h_raw(detail::couplings_of(model), psi, out, worker_count(exec));
}

TwoExcState apply_h(const SingleAtomModel& model, const TwoExcState& psi, const Execution& exec) {
    TwoExcState out(model.modes());
    apply_h(model, psi, out, exec);
    return out;
}

double energy(const SingleAtomModel& model, const TwoExcState& psi, const Execution& exec) {
    return inner(psi, apply_h(model, psi, exec)).real();
}

void write_snapshot(const std::filesystem::path& path, const TwoExcState& s, double time) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(fmt::format("cannot write snapshot {}", path.string()));
    const nlohmann::json header = {{"M", s.modes()},
                                   {"time", time},
                                   {"layout", "f,e,g-rowmajor"},
                                   {"dtype", "complex128-le-interleaved"},
                                   {"count", 1 + s.ce.size() + s.cg.size()}};
    out << header.dump() << '\n';
    detail::put_complex(out, std::span(&s.cf, 1));
    detail::put_complex(out, s.ce);
    detail::put_complex(out, s.cg);
}

Snapshot read_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(fmt::format("cannot open snapshot {}", path.string()));
    std::string line;
    std::getline(in, line);
    const auto header = nlohmann::json::parse(line);
    if (header.at("layout") != "f,e,g-rowmajor") throw Error("unknown snapshot layout");
    const auto M = header.at("M").get<std::size_t>();
    Snapshot snap{header.at("time").get<double>(), TwoExcState(M)};
    auto read = [&in](cplx& z) {
        const double re = detail::get_f64(in);
        const double im = detail::get_f64(in);
        z = {re, im};
    };
    read(snap.state.cf);
    for (auto& z : snap.state.ce) read(z);
    for (auto& z : snap.state.cg) read(z);
    if (!in) throw Error(fmt::format("snapshot {} is truncated", path.string()));
    return snap;
}

}  // namespace giantpair
