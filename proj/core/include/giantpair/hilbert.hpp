#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "giantpair/execution.hpp"
#include "giantpair/model.hpp"

namespace giantpair {

// Amplitudes on |f,0>, |e,k_i> and |g,k_i,k_j> (row-major, i = photon of the f->e step).
struct TwoExcState {
    cplx cf{0.0, 0.0};
    std::vector<cplx> ce;
    std::vector<cplx> cg;

    TwoExcState() = default;
    explicit TwoExcState(std::size_t M) : ce(M), cg(M * M) {}

    std::size_t modes() const { return ce.size(); }
    cplx& g(std::size_t i, std::size_t j) { return cg[i * ce.size() + j]; }
    const cplx& g(std::size_t i, std::size_t j) const { return cg[i * ce.size() + j]; }
};

struct Populations {
    double f = 0.0;
    double e = 0.0;
    double g = 0.0;

    double total() const { return f + e + g; }
};

Populations populations(const TwoExcState& s);
double norm_squared(const TwoExcState& s);
cplx inner(const TwoExcState& a, const TwoExcState& b);  // <a|b>
void scale(TwoExcState& s, cplx factor);
void axpy(cplx alpha, const TwoExcState& x, TwoExcState& y);  // y += alpha x

TwoExcState initial_f_state(std::size_t M);

class SingleAtomModel {
public:
    SingleAtomModel(ModeGrid grid, AtomSpec atom, CouplingSpectrum spectrum);

    const ModeGrid& grid() const { return grid_; }
    const AtomSpec& atom() const { return atom_; }
    const CouplingSpectrum& spectrum() const { return spectrum_; }
    double omega_f() const { return atom_.omega_fg(); }
    std::size_t modes() const { return grid_.size(); }

    // Largest diagonal entry, max(omega_fg, max_ij omega_i + omega_j).
    double max_diagonal() const;

private:
    ModeGrid grid_;
    AtomSpec atom_;
    CouplingSpectrum spectrum_;
};

TwoExcState apply_h(const SingleAtomModel& model, const TwoExcState& psi,
                    const Execution& exec = {});
void apply_h(const SingleAtomModel& model, const TwoExcState& psi, TwoExcState& out,
             const Execution& exec = {});

// <psi|H|psi>, real part.
double energy(const SingleAtomModel& model, const TwoExcState& psi, const Execution& exec = {});

// One JSON header line followed by little-endian binary64 (re, im) pairs in
// the order f, e[0..M), g[0..M*M).
void write_snapshot(const std::filesystem::path& path, const TwoExcState& s, double time);

struct Snapshot {
    double time = 0.0;
    TwoExcState state;
};

Snapshot read_snapshot(const std::filesystem::path& path);

}  // namespace giantpair
