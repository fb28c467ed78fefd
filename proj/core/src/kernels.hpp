#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "giantpair/hilbert.hpp"

namespace giantpair::detail {

// Single-atom Hamiltonian data on an arbitrary mode subset.
struct AtomCouplings {
    std::vector<double> w;
    std::vector<cplx> g;
    double w_eg = 0.0;
    double w_fg = 0.0;

    std::size_t size() const { return w.size(); }
};

AtomCouplings couplings_of(const SingleAtomModel& model);

void apply_h_raw(const AtomCouplings& c, const TwoExcState& psi, TwoExcState& out, int threads);

}  // namespace giantpair::detail
