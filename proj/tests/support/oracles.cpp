#include "oracles.hpp"

#include <cmath>

namespace oracle {

using namespace giantpair;

Eigen::MatrixXcd single_atom_h(const SingleAtomModel& model) {
    const std::size_t M = model.modes();
    const auto& grid = model.grid();
    const auto& g = model.spectrum().g;
    const double w_eg = model.atom().omega_eg();
    const auto n = static_cast<Eigen::Index>(1 + M + M * M);
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(n, n);
    auto e = [](std::size_t i) { return static_cast<Eigen::Index>(1 + i); };
    auto pair = [M](std::size_t i, std::size_t j) { return static_cast<Eigen::Index>(1 + M + i * M + j); };
    H(0, 0) = model.atom().omega_fg();
    for (std::size_t i = 0; i < M; ++i) {
        H(0, e(i)) = g[i];
        H(e(i), 0) = std::conj(g[i]);
        H(e(i), e(i)) = grid.omega(i) + w_eg;
        for (std::size_t j = 0; j < M; ++j) {
            H(e(i), pair(i, j)) = g[j];
            H(pair(i, j), e(i)) = std::conj(g[j]);
            H(pair(i, j), pair(i, j)) = grid.omega(i) + grid.omega(j);
        }
    }
    return H;
}

Eigen::MatrixXcd cascade_h(const CascadeModel& model) {
    const std::size_t M = model.modes();
    const auto& grid = model.grid();
    const auto& g = model.spectrum_a().g;
    const double w_eg = model.atom().omega_eg();
    const double w_fg = model.atom().omega_fg();
    const double d = model.separation();
    const auto n = static_cast<Eigen::Index>(2 + M * M);
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(n, n);
    for (std::size_t i = 0; i < M; ++i)
        for (std::size_t j = 0; j < M; ++j) {
            const auto r = static_cast<Eigen::Index>(2 + i * M + j);
            const cplx gA = g[i] * g[j] / (grid.omega(i) - w_eg);
            const cplx gB = gA * std::exp(cplx{0.0, (grid.k(i) + grid.k(j)) * d});
            H(0, r) = gA;
            H(1, r) = gB;
            H(r, 0) = std::conj(gA);
            H(r, 1) = std::conj(gB);
            H(r, r) = grid.omega(i) + grid.omega(j) - w_fg;
        }
    return H;
}

Eigen::VectorXcd to_vector(const TwoExcState& s) {
    const std::size_t M = s.modes();
    Eigen::VectorXcd v(static_cast<Eigen::Index>(1 + M + M * M));
    v(0) = s.cf;
    for (std::size_t i = 0; i < M; ++i) v(static_cast<Eigen::Index>(1 + i)) = s.ce[i];
    for (std::size_t i = 0; i < M * M; ++i) v(static_cast<Eigen::Index>(1 + M + i)) = s.cg[i];
    return v;
}

TwoExcState to_state(const Eigen::VectorXcd& v, std::size_t M) {
    TwoExcState s(M);
    s.cf = v(0);
    for (std::size_t i = 0; i < M; ++i) s.ce[i] = v(static_cast<Eigen::Index>(1 + i));
    for (std::size_t i = 0; i < M * M; ++i) s.cg[i] = v(static_cast<Eigen::Index>(1 + M + i));
    return s;
}

Eigen::VectorXcd to_vector(const CascadeState& s) {
    Eigen::VectorXcd v(static_cast<Eigen::Index>(2 + s.field.size()));
    v(0) = s.ca;
    v(1) = s.cb;
    for (std::size_t i = 0; i < s.field.size(); ++i) v(static_cast<Eigen::Index>(2 + i)) = s.field[i];
    return v;
}

CascadeState to_cascade(const Eigen::VectorXcd& v, std::size_t M) {
    CascadeState s(M);
    s.ca = v(0);
    s.cb = v(1);
    for (std::size_t i = 0; i < M * M; ++i) s.field[i] = v(static_cast<Eigen::Index>(2 + i));
    return s;
}

Propagator::Propagator(const Eigen::MatrixXcd& H) : es_(H) {}

Eigen::VectorXcd Propagator::operator()(const Eigen::VectorXcd& v, double t) const {
    const Eigen::VectorXcd c = es_.eigenvectors().adjoint() * v;
    Eigen::VectorXcd phased(c.size());
    for (Eigen::Index i = 0; i < c.size(); ++i)
        phased(i) = std::exp(cplx{0.0, -es_.eigenvalues()(i) * t}) * c(i);
    return es_.eigenvectors() * phased;
}

std::vector<cplx> spectrum(const CouplingSequence& seq, const ModeGrid& grid) {
    const long double x0 = 2.0L * std::acos(-1.0L);
    std::vector<cplx> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        long double re = 0.0L, im = 0.0L;
        for (const auto& p : seq.points()) {
            const long double ph = p.theta - static_cast<long double>(grid.k(i)) * p.x * x0;
            re += p.amplitude * std::cos(ph);
            im += p.amplitude * std::sin(ph);
        }
        out[i] = cplx(static_cast<double>(re), static_cast<double>(im)) * seq.g0();
    }
    return out;
}

std::vector<cplx> naive_x_transform(const std::vector<cplx>& phi, const ModeGrid& grid) {
    const std::size_t M = grid.size();
    std::vector<cplx> out(M * M);
    for (std::size_t n1 = 0; n1 < M; ++n1)
        for (std::size_t n2 = 0; n2 < M; ++n2) {
            cplx acc{};
            for (std::size_t m1 = 0; m1 < M; ++m1)
                for (std::size_t m2 = 0; m2 < M; ++m2)
                    acc += std::exp(cplx{0.0, grid.k(m1) * grid.x(n1) + grid.k(m2) * grid.x(n2)}) *
                           phi[m1 * M + m2];
            out[n1 * M + n2] = acc / static_cast<double>(M);
        }
    return out;
}

namespace {

cplx gauss(std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    return {n(rng), n(rng)};
}

}  // namespace

TwoExcState random_state(std::size_t M, std::mt19937_64& rng) {
    TwoExcState s(M);
    s.cf = gauss(rng);
    for (auto& v : s.ce) v = gauss(rng);
    for (auto& v : s.cg) v = gauss(rng);
    scale(s, 1.0 / std::sqrt(norm_squared(s)));
    return s;
}

CascadeState random_cascade_state(std::size_t M, std::mt19937_64& rng) {
    CascadeState s(M);
    s.ca = gauss(rng);
    s.cb = gauss(rng);
    for (auto& v : s.field) v = gauss(rng);
    const double n = std::sqrt(populations(s).total());
    s.ca /= n;
    s.cb /= n;
    for (auto& v : s.field) v /= n;
    return s;
}

CouplingSequence random_sequence(std::size_t N, bool chiral, std::mt19937_64& rng, double span) {
    std::uniform_real_distribution<double> ux(-span, span), ua(0.0, 1.0), ut(-1.5, 1.5);
    std::vector<CouplingPoint> pts(N);
    for (auto& p : pts) p = {ux(rng), ua(rng), chiral ? ut(rng) : 0.0};
    return CouplingSequence::from_unsorted(std::move(pts), 1.0, chiral);
}

double max_abs_diff(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace oracle
